#pragma once

#include "medax/geometry.hpp"
#include "medax/kd_tree.hpp"
#include "medax/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace medax {

struct Box {
    Vec lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vec& x) const {
        for (int i = 0; i < lo.size(); ++i) {
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        }
        return true;
    }

    double diameter() const { return (hi - lo).norm(); }

    void validate() const {
        if (lo.size() != hi.size() || lo.size() == 0) {
            throw std::invalid_argument("Box: corner dimensions disagree");
        }
        for (int i = 0; i < lo.size(); ++i) {
            if (!(lo[i] < hi[i])) throw std::invalid_argument("Box: empty extent");
        }
    }

    Box inflated(double margin) const {
        return Box{Vec(lo.array() - margin), Vec(hi.array() + margin)};
    }
};

struct NearCandidate {
    Vec point;
    double dist = 0.0;
};

/// tau-relaxed nearest-point set: candidate realizers y with
/// d(x, y) <= d(x) + tau, plus the distance d(x) itself.
struct NearSet {
    std::vector<Vec> points;
    std::vector<double> dists;
    double d = 0.0;
    double tau = 0.0;
};

/// Maps scene coordinates to SVG pixel coordinates.
struct SvgMapper {
    double x0 = 0.0, y1 = 0.0, scale = 1.0;
    double sx(double x) const { return (x - x0) * scale; }
    double sy(double y) const { return (y1 - y) * scale; }  // flip y
    double slen(double l) const { return l * scale; }
};

/// One closed subset of R^n with analytic distance and candidate queries.
/// collect_near appends every candidate realizer whose distance to x is at
/// most `limit`; candidates are isolated critical points of the distance to
/// the shape (one per connected component of the near locus), except for
/// loci that degenerate to a full sphere, which are represented by a
/// deterministic finite net.
class Shape {
public:
    virtual ~Shape() = default;
    virtual int dim() const = 0;
    virtual std::string kind() const = 0;
    virtual double distance(const Vec& x) const = 0;
    virtual void collect_near(const Vec& x, double limit,
                              std::vector<NearCandidate>& out) const = 0;
    virtual Box bounds() const = 0;
    /// Preferred bbox inflation; negative means "use half the scene diagonal".
    virtual double bbox_margin() const { return -1.0; }
    virtual void render_svg(std::ostream&, const SvgMapper&) const {}
};

namespace detail {

inline void append_candidate(std::vector<NearCandidate>& out, Vec p, double dist) {
    out.push_back(NearCandidate{std::move(p), dist});
}

/// Foot of x on segment [a, b] (clamped), and its distance.
inline NearCandidate segment_foot(const Vec& x, const Vec& a, const Vec& b) {
    const Vec ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp((x - a).dot(ab) / len2, 0.0, 1.0);
    Vec foot = a + t * ab;
    const double d = (x - foot).norm();
    return NearCandidate{std::move(foot), d};
}

}  // namespace detail

/// Finite set of points, indexed for nearest/radius queries. The brute-force
/// path is kept as an always-available oracle switch.
class PointCloudShape final : public Shape {
public:
    PointCloudShape(std::vector<Vec> points, bool use_index = true,
                    std::string kind_label = "points")
        : kind_(std::move(kind_label)), use_index_(use_index), tree_(std::move(points)) {
        if (tree_.size() == 0) throw std::invalid_argument("point cloud: empty geometry");
    }

    int dim() const override { return static_cast<int>(tree_.point(0).size()); }
    std::string kind() const override { return kind_; }

    double distance(const Vec& x) const override {
        return use_index_ ? tree_.nearest(x).second : tree_.nearest_brute(x).second;
    }

    void collect_near(const Vec& x, double limit,
                      std::vector<NearCandidate>& out) const override {
        const auto idx = use_index_ ? tree_.within(x, limit) : tree_.within_brute(x, limit);
        for (std::size_t i : idx) {
            detail::append_candidate(out, tree_.point(i), (tree_.point(i) - x).norm());
        }
    }

    Box bounds() const override {
        Vec lo = tree_.point(0), hi = tree_.point(0);
        for (std::size_t i = 1; i < tree_.size(); ++i) {
            lo = lo.cwiseMin(tree_.point(i));
            hi = hi.cwiseMax(tree_.point(i));
        }
        return Box{lo, hi};
    }

    void set_use_index(bool v) { use_index_ = v; }
    const KdTree& tree() const { return tree_; }

    std::vector<Vec> points() const {
        std::vector<Vec> out;
        out.reserve(tree_.size());
        for (std::size_t i = 0; i < tree_.size(); ++i) out.push_back(tree_.point(i));
        return out;
    }

    void render_svg(std::ostream& os, const SvgMapper& m) const override {
        for (std::size_t i = 0; i < tree_.size(); ++i) {
            const Vec& p = tree_.point(i);
            os << "<circle cx=\"" << m.sx(p[0]) << "\" cy=\"" << m.sy(p[1])
               << "\" r=\"3\" fill=\"black\"/>\n";
        }
    }

private:
    std::string kind_;
    bool use_index_;
    KdTree tree_;
};

/// Piecewise-linear curve. Candidates are the per-segment feet; feet shared
/// by adjacent segments are deduplicated at the model level.
class PolylineShape final : public Shape {
public:
    explicit PolylineShape(std::vector<Vec> vertices) : verts_(std::move(vertices)) {
        if (verts_.size() < 2) throw std::invalid_argument("polyline: need at least 2 vertices");
    }

    int dim() const override { return static_cast<int>(verts_[0].size()); }
    std::string kind() const override { return "polyline"; }

    double distance(const Vec& x) const override {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < verts_.size(); ++i) {
            best = std::min(best, detail::segment_foot(x, verts_[i], verts_[i + 1]).dist);
        }
        return best;
    }

    void collect_near(const Vec& x, double limit,
                      std::vector<NearCandidate>& out) const override {
        for (std::size_t i = 0; i + 1 < verts_.size(); ++i) {
            auto cand = detail::segment_foot(x, verts_[i], verts_[i + 1]);
            if (cand.dist <= limit) out.push_back(std::move(cand));
        }
    }

    Box bounds() const override {
        Vec lo = verts_[0], hi = verts_[0];
        for (const Vec& v : verts_) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        return Box{lo, hi};
    }

    const std::vector<Vec>& vertices() const { return verts_; }

    void render_svg(std::ostream& os, const SvgMapper& m) const override {
        os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
        for (const Vec& v : verts_) os << m.sx(v[0]) << "," << m.sy(v[1]) << " ";
        os << "\"/>\n";
    }

private:
    std::vector<Vec> verts_;
};

/// Circle (n = 2) or sphere (n >= 3) as a hollow hypersurface. From the
/// center every surface point is nearest; that locus is represented by a
/// deterministic finite net whenever the whole surface fits the distance
/// slack, i.e. ||x - c|| <= tau/2.
class SphereShape final : public Shape {
public:
    SphereShape(Vec center, double radius, int net_resolution = 16)
        : center_(std::move(center)), radius_(radius) {
        if (radius_ <= 0.0) throw std::invalid_argument("circle: radius must be positive");
        if (net_resolution < 4) throw std::invalid_argument("circle: net resolution too small");
        build_net(net_resolution);
    }

    int dim() const override { return static_cast<int>(center_.size()); }
    std::string kind() const override { return "circle_or_sphere"; }

    double distance(const Vec& x) const override {
        return std::abs((x - center_).norm() - radius_);
    }

    void collect_near(const Vec& x, double limit,
                      std::vector<NearCandidate>& out) const override {
        const Vec delta = x - center_;
        const double rho = delta.norm();
        // Whole surface within the slack: hand out the net.
        if (rho + radius_ <= limit) {
            if (rho > 1e-12 * radius_) {
                detail::append_candidate(out, center_ + radius_ / rho * delta,
                                         std::abs(rho - radius_));
            }
            for (const Vec& u : net_) {
                detail::append_candidate(out, center_ + radius_ * u,
                                         (center_ + radius_ * u - x).norm());
            }
            return;
        }
        if (rho <= 1e-12 * radius_) {
            // exactly at the center but the slack does not cover the surface
            for (const Vec& u : net_) {
                detail::append_candidate(out, center_ + radius_ * u, radius_);
            }
            return;
        }
        const double d = std::abs(rho - radius_);
        if (d <= limit) {
            detail::append_candidate(out, center_ + radius_ / rho * delta, d);
        }
    }

    Box bounds() const override {
        return Box{Vec(center_.array() - radius_), Vec(center_.array() + radius_)};
    }

    double bbox_margin() const override { return 2.0 * radius_; }

    const Vec& center() const { return center_; }
    double radius() const { return radius_; }
    const std::vector<Vec>& net() const { return net_; }

    void render_svg(std::ostream& os, const SvgMapper& m) const override {
        os << "<circle cx=\"" << m.sx(center_[0]) << "\" cy=\"" << m.sy(center_[1])
           << "\" r=\"" << m.slen(radius_)
           << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    }

private:
    void build_net(int resolution) {
        const int n = dim();
        if (n == 2) {
            for (int j = 0; j < resolution; ++j) {
                const double th = 2.0 * M_PI * j / resolution;
                Vec u(2);
                u << std::cos(th), std::sin(th);
                net_.push_back(u);
            }
            return;
        }
        const int count = resolution * (n - 1);
        if (n == 3) {
            // spherical Fibonacci net
            const double golden = M_PI * (3.0 - std::sqrt(5.0));
            for (int j = 0; j < count; ++j) {
                const double z = 1.0 - 2.0 * (j + 0.5) / count;
                const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                const double th = golden * j;
                Vec u(3);
                u << r * std::cos(th), r * std::sin(th), z;
                net_.push_back(u);
            }
            return;
        }
        SplitMix64 rng(0x6e657453ULL + static_cast<std::uint64_t>(n));
        for (int j = 0; j < count; ++j) net_.push_back(rng.unit_vector(n));
    }

    Vec center_;
    double radius_;
    std::vector<Vec> net_;
};

/// Filled convex polygon in the plane. Convexity gives a unique projection
/// for every exterior point, so the candidate set is always a singleton and
/// no distance slack can split it.
class ConvexPolygonShape final : public Shape {
public:
    explicit ConvexPolygonShape(std::vector<Vec> vertices) : verts_(std::move(vertices)) {
        if (verts_.size() < 3) throw std::invalid_argument("polygon: need at least 3 vertices");
        for (const Vec& v : verts_) {
            if (v.size() != 2) throw std::invalid_argument("polygon: only supported in R^2");
        }
        validate_convex();
    }

    int dim() const override { return 2; }
    std::string kind() const override { return "convex_polygon"; }

    double distance(const Vec& x) const override {
        if (inside(x)) return 0.0;
        return boundary_foot(x).dist;
    }

    void collect_near(const Vec& x, double limit,
                      std::vector<NearCandidate>& out) const override {
        if (inside(x)) {
            detail::append_candidate(out, x, 0.0);
            return;
        }
        auto cand = boundary_foot(x);
        if (cand.dist <= limit) out.push_back(std::move(cand));
    }

    Box bounds() const override {
        Vec lo = verts_[0], hi = verts_[0];
        for (const Vec& v : verts_) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        return Box{lo, hi};
    }

    const std::vector<Vec>& vertices() const { return verts_; }

    void render_svg(std::ostream& os, const SvgMapper& m) const override {
        os << "<polygon fill=\"#dddddd\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
        for (const Vec& v : verts_) os << m.sx(v[0]) << "," << m.sy(v[1]) << " ";
        os << "\"/>\n";
    }

private:
    static double cross2(const Vec& o, const Vec& a, const Vec& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    }

    void validate_convex() const {
        const std::size_t m = verts_.size();
        double sign = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double c = cross2(verts_[i], verts_[(i + 1) % m], verts_[(i + 2) % m]);
            if (std::abs(c) < 1e-14) continue;  // collinear run is fine
            if (sign == 0.0) {
                sign = c;
            } else if (sign * c < 0.0) {
                throw std::invalid_argument("polygon: vertices are not convex");
            }
        }
        if (sign == 0.0) throw std::invalid_argument("polygon: degenerate (zero area)");
    }

    bool inside(const Vec& x) const {
        const std::size_t m = verts_.size();
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < m; ++i) {
            const double c = cross2(verts_[i], verts_[(i + 1) % m], x);
            if (c > 1e-14) has_pos = true;
            if (c < -1e-14) has_neg = true;
        }
        return !(has_pos && has_neg);
    }

    NearCandidate boundary_foot(const Vec& x) const {
        NearCandidate best;
        best.dist = std::numeric_limits<double>::infinity();
        const std::size_t m = verts_.size();
        for (std::size_t i = 0; i < m; ++i) {
            auto cand = detail::segment_foot(x, verts_[i], verts_[(i + 1) % m]);
            if (cand.dist < best.dist) best = std::move(cand);
        }
        return best;
    }

    std::vector<Vec> verts_;
};

/// Union of closed balls (radius zero degenerates to a point). Candidates
/// are the per-ball feet; distinct balls give distinct near-locus
/// components.
class BallUnionShape final : public Shape {
public:
    BallUnionShape(std::vector<Vec> centers, std::vector<double> radii)
        : centers_(std::move(centers)), radii_(std::move(radii)) {
        if (centers_.empty()) throw std::invalid_argument("balls: empty geometry");
        if (centers_.size() != radii_.size()) {
            throw std::invalid_argument("balls: centers/radii length mismatch");
        }
        for (double r : radii_) {
            if (r < 0.0) throw std::invalid_argument("balls: negative radius");
        }
    }

    int dim() const override { return static_cast<int>(centers_[0].size()); }
    std::string kind() const override { return "union_of_balls"; }

    double distance(const Vec& x) const override {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            best = std::min(best, (x - centers_[i]).norm() - radii_[i]);
        }
        return std::max(0.0, best);
    }

    void collect_near(const Vec& x, double limit,
                      std::vector<NearCandidate>& out) const override {
        if (distance(x) == 0.0) {
            detail::append_candidate(out, x, 0.0);
            return;
        }
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            const Vec delta = x - centers_[i];
            const double rho = delta.norm();
            const double d = rho - radii_[i];
            if (d <= limit) {
                Vec foot = radii_[i] == 0.0 ? centers_[i]
                                            : Vec(centers_[i] + radii_[i] / rho * delta);
                detail::append_candidate(out, std::move(foot), d);
            }
        }
    }

    Box bounds() const override {
        Vec lo = Vec(centers_[0].array() - radii_[0]);
        Vec hi = Vec(centers_[0].array() + radii_[0]);
        for (std::size_t i = 1; i < centers_.size(); ++i) {
            lo = lo.cwiseMin(Vec(centers_[i].array() - radii_[i]));
            hi = hi.cwiseMax(Vec(centers_[i].array() + radii_[i]));
        }
        return Box{lo, hi};
    }

    double bbox_margin() const override {
        return 2.0 * *std::max_element(radii_.begin(), radii_.end());
    }

    void render_svg(std::ostream& os, const SvgMapper& m) const override {
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            os << "<circle cx=\"" << m.sx(centers_[i][0]) << "\" cy=\"" << m.sy(centers_[i][1])
               << "\" r=\"" << std::max(m.slen(radii_[i]), 2.0)
               << "\" fill=\"#dddddd\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
        }
    }

private:
    std::vector<Vec> centers_;
    std::vector<double> radii_;
};

/// A nonempty closed set, stored as a union of member shapes. Queries are
/// read-only; the model never changes after construction.
class ClosedSetModel {
public:
    ClosedSetModel() = default;

    explicit ClosedSetModel(std::vector<std::shared_ptr<const Shape>> members)
        : members_(std::move(members)) {
        if (members_.empty()) throw std::invalid_argument("model: empty geometry");
        dim_ = members_[0]->dim();
        for (const auto& s : members_) {
            if (s->dim() != dim_) throw std::invalid_argument("model: mixed shape dimensions");
        }
    }

    int dim() const { return dim_; }
    const std::vector<std::shared_ptr<const Shape>>& members() const { return members_; }

    std::string kind() const {
        if (members_.size() == 1) return members_[0]->kind();
        return "union";
    }

    double distance(const Vec& x) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : members_) best = std::min(best, s->distance(x));
        return best;
    }

    /// All candidate realizers within d(x) + tau, deduplicated (1e-9) and
    /// sorted by distance (ties broken lexicographically).
    NearSet near_set(const Vec& x, double tau) const {
        if (tau < 0.0) throw std::invalid_argument("near_set: tau must be nonnegative");
        NearSet ns;
        ns.d = distance(x);
        ns.tau = tau;
        const double limit = ns.d + tau;
        std::vector<NearCandidate> cands;
        for (const auto& s : members_) s->collect_near(x, limit + 1e-15, cands);
        std::sort(cands.begin(), cands.end(), [](const NearCandidate& a, const NearCandidate& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            return lex_less(a.point, b.point);
        });
        for (const auto& c : cands) {
            if (c.dist > limit + 1e-15) continue;
            bool duplicate = false;
            for (const Vec& kept : ns.points) {
                if ((kept - c.point).norm() <= 1e-9) {
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) {
                ns.points.push_back(c.point);
                ns.dists.push_back(c.dist);
            }
        }
        return ns;
    }

    Box bounds() const {
        Box b = members_[0]->bounds();
        for (std::size_t i = 1; i < members_.size(); ++i) {
            Box mb = members_[i]->bounds();
            b.lo = b.lo.cwiseMin(mb.lo);
            b.hi = b.hi.cwiseMax(mb.hi);
        }
        return b;
    }

    /// Default scene bbox: geometry bounds inflated by the largest member
    /// margin (twice the radius for circles and balls), falling back to half
    /// the bounding diagonal, with a floor of 1.
    Box default_bbox() const {
        Box b = bounds();
        double margin = 0.0;
        bool any = false;
        for (const auto& s : members_) {
            const double m = s->bbox_margin();
            if (m >= 0.0) {
                margin = std::max(margin, m);
                any = true;
            }
        }
        if (!any) margin = 0.5 * b.diameter();
        if (margin <= 0.0) margin = 1.0;
        return b.inflated(margin);
    }

    void render_svg(std::ostream& os, const SvgMapper& m) const {
        for (const auto& s : members_) s->render_svg(os, m);
    }

private:
    std::vector<std::shared_ptr<const Shape>> members_;
    int dim_ = 0;
};

/// Grid/random sampling controls carried by a scene.
struct SamplingConfig {
    int grid = 0;             // per-axis resolution; 0 = unset
    long random_count = 0;    // 0 = unset
    std::uint64_t seed = 0;
};

struct Scene {
    ClosedSetModel model;
    Box bbox;
    SamplingConfig sampling;
};

/// Scene-file problem with field context; maps to CLI exit code 2.
class SceneError : public std::runtime_error {
public:
    explicit SceneError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

using json = nlohmann::json;

inline Vec parse_vec(const json& j, int expect_dim, const std::string& where) {
    if (!j.is_array()) throw SceneError(where + ": expected a coordinate array");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw SceneError(where + ": coordinate is not a number");
        v[static_cast<int>(i)] = j[i].get<double>();
        if (!std::isfinite(v[static_cast<int>(i)])) {
            throw SceneError(where + ": coordinate is not finite");
        }
    }
    if (expect_dim > 0 && v.size() != expect_dim) {
        std::ostringstream os;
        os << where << ": dimension mismatch, expected " << expect_dim << " coordinates, got "
           << v.size();
        throw SceneError(os.str());
    }
    return v;
}

inline std::vector<Vec> parse_vec_list(const json& j, int expect_dim, const std::string& where) {
    if (!j.is_array() || j.empty()) throw SceneError(where + ": expected a nonempty array");
    std::vector<Vec> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_vec(j[i], expect_dim, where + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline std::shared_ptr<const Shape> parse_shape(const json& j, int dim,
                                                const std::string& where) {
    if (!j.is_object()) throw SceneError(where + ": expected an object");
    if (!j.contains("kind")) throw SceneError(where + ": missing \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "points") {
            return std::make_shared<PointCloudShape>(
                parse_vec_list(j.at("coords"), dim, where + ".coords"));
        }
        if (kind == "circle") {
            const Vec center = parse_vec(j.at("center"), dim, where + ".center");
            if (!j.contains("radius") || !j.at("radius").is_number()) {
                throw SceneError(where + ".radius: missing or not a number");
            }
            int net = 16;
            if (j.contains("net")) net = j.at("net").get<int>();
            return std::make_shared<SphereShape>(center, j.at("radius").get<double>(), net);
        }
        if (kind == "polyline") {
            return std::make_shared<PolylineShape>(
                parse_vec_list(j.at("vertices"), dim, where + ".vertices"));
        }
        if (kind == "polygon") {
            if (dim != 2) throw SceneError(where + ": polygon requires dim = 2");
            return std::make_shared<ConvexPolygonShape>(
                parse_vec_list(j.at("vertices"), dim, where + ".vertices"));
        }
        if (kind == "balls") {
            auto centers = parse_vec_list(j.at("centers"), dim, where + ".centers");
            if (!j.contains("radii") || !j.at("radii").is_array()) {
                throw SceneError(where + ".radii: missing or not an array");
            }
            std::vector<double> radii;
            for (const auto& r : j.at("radii")) radii.push_back(r.get<double>());
            return std::make_shared<BallUnionShape>(std::move(centers), std::move(radii));
        }
    } catch (const SceneError&) {
        throw;
    } catch (const std::exception& e) {
        throw SceneError(where + ": " + e.what());
    }
    throw SceneError(where + ": unknown kind \"" + kind +
                     "\" (known: points, circle, polyline, polygon, balls)");
}

}  // namespace detail

inline Scene parse_scene_json(const nlohmann::json& doc) {
    using detail::json;
    if (!doc.is_object()) throw SceneError("scene: top level must be an object");
    if (!doc.contains("dim") || !doc.at("dim").is_number_integer()) {
        throw SceneError("scene.dim: missing or not an integer");
    }
    const int dim = doc.at("dim").get<int>();
    if (dim < 1) throw SceneError("scene.dim: must be >= 1");
    if (!doc.contains("shapes") || !doc.at("shapes").is_array() || doc.at("shapes").empty()) {
        throw SceneError("scene.shapes: missing, not an array, or empty geometry");
    }
    std::vector<std::shared_ptr<const Shape>> members;
    for (std::size_t i = 0; i < doc.at("shapes").size(); ++i) {
        members.push_back(detail::parse_shape(doc.at("shapes")[i], dim,
                                              "shapes[" + std::to_string(i) + "]"));
    }
    Scene scene;
    scene.model = ClosedSetModel(std::move(members));

    if (doc.contains("bbox")) {
        const auto& b = doc.at("bbox");
        if (!b.is_array() || b.size() != 2) {
            throw SceneError("scene.bbox: expected [lo, hi] corner pair");
        }
        scene.bbox = Box{detail::parse_vec(b[0], dim, "bbox[0]"),
                         detail::parse_vec(b[1], dim, "bbox[1]")};
        try {
            scene.bbox.validate();
        } catch (const std::exception& e) {
            throw SceneError(std::string("scene.bbox: ") + e.what());
        }
    } else {
        scene.bbox = scene.model.default_bbox();
    }

    if (doc.contains("sampling")) {
        const auto& s = doc.at("sampling");
        if (!s.is_object()) throw SceneError("scene.sampling: expected an object");
        if (s.contains("grid")) scene.sampling.grid = s.at("grid").get<int>();
        if (s.contains("random")) scene.sampling.random_count = s.at("random").get<long>();
        if (s.contains("seed")) scene.sampling.seed = s.at("seed").get<std::uint64_t>();
        if (scene.sampling.grid < 0 || scene.sampling.random_count < 0) {
            throw SceneError("scene.sampling: counts must be nonnegative");
        }
    }
    return scene;
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SceneError("scene: cannot open file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SceneError(std::string("scene: ") + e.what());
    }
    return parse_scene_json(doc);
}

/// Dense level-set sample treated as the closed set itself. This is an
/// outer approximation: distances are to the stored samples, not to the
/// ideal surface, so the model is a different (but still closed) set E.
inline ClosedSetModel make_sampled_implicit(const std::function<double(const Vec&)>& field,
                                            const Box& box, int per_axis, double band) {
    box.validate();
    const int n = box.dim();
    std::vector<Vec> samples;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    const long total = static_cast<long>(std::pow(per_axis, n));
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        Vec x(n);
        for (int a = 0; a < n; ++a) {
            const int i = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            x[a] = box.lo[a] + (box.hi[a] - box.lo[a]) * i / (per_axis - 1.0);
        }
        if (std::abs(field(x)) <= band) samples.push_back(std::move(x));
    }
    if (samples.empty()) throw std::invalid_argument("sampled_implicit: no samples in band");
    return ClosedSetModel({std::make_shared<PointCloudShape>(std::move(samples), true,
                                                             "sampled_implicit")});
}

}  // namespace medax
