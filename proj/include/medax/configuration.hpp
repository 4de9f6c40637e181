#pragma once

#include "medax/geometry.hpp"
#include "medax/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace medax {

/// A set of k unit directions on S^{n-1} in generic position (they span a
/// (k-1)-dimensional affine plane). Directions are stored sorted
/// lexicographically, which fixes a canonical labeling; all operations on
/// configurations are label-invariant.
class Configuration {
public:
    static Configuration from_directions(std::vector<Vec> dirs,
                                         double sigma_tol = kDefaultSigmaTol) {
        Configuration a = unchecked(std::move(dirs));
        a.validate(sigma_tol);
        return a;
    }

    /// Skips validation: for deserialization and for tests that need to
    /// construct near-degenerate inputs.
    static Configuration unchecked(std::vector<Vec> dirs) {
        Configuration a;
        std::sort(dirs.begin(), dirs.end(), lex_less);
        a.dirs_ = std::move(dirs);
        return a;
    }

    void validate(double sigma_tol = kDefaultSigmaTol) const {
        const int kk = k();
        if (kk < 2) throw std::invalid_argument("Configuration: need k >= 2 directions");
        const int nn = dim();
        if (kk > nn + 1) throw std::invalid_argument("Configuration: k must be <= n+1");
        for (const Vec& d : dirs_) {
            if (d.size() != nn) throw std::invalid_argument("Configuration: mixed dimensions");
            if (std::abs(d.norm() - 1.0) > 1e-9) {
                throw std::invalid_argument("Configuration: directions must be unit vectors");
            }
        }
        if (!is_generic(dirs_, sigma_tol)) {
            throw std::invalid_argument("Configuration: directions are not in generic position");
        }
    }

    const std::vector<Vec>& dirs() const { return dirs_; }
    const Vec& dir(int i) const { return dirs_[static_cast<std::size_t>(i)]; }
    int k() const { return static_cast<int>(dirs_.size()); }
    int dim() const { return dirs_.empty() ? 0 : static_cast<int>(dirs_.front().size()); }

private:
    std::vector<Vec> dirs_;
};

/// min over relabelings of the worst pairwise distance, by exhaustive
/// enumeration of the k! permutations. Fine at desk scale (k <= n+1 <= 7);
/// a bottleneck-assignment solver would replace this for large k.
inline double config_distance(const Configuration& a, const Configuration& b) {
    if (a.k() != b.k()) {
        throw std::invalid_argument("config_distance: configurations have different k");
    }
    const int k = a.k();
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (int i = 0; i < k && worst < best; ++i) {
            worst = std::max(worst, (a.dir(i) - b.dir(perm[static_cast<std::size_t>(i)])).norm());
        }
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Orthonormal frame attached to a configuration: P is the (k-1)-plane
/// through the origin parallel to the affine span of the directions, Q its
/// orthogonal complement (dimension n-k+1, possibly zero), and h the common
/// Q-projection of all directions.
struct Frame {
    Mat basis_p;  // n x (k-1), orthonormal columns
    Mat basis_q;  // n x (n-k+1), orthonormal columns
    Vec h;

    int dim() const { return static_cast<int>(basis_p.rows()); }
    int dim_p() const { return static_cast<int>(basis_p.cols()); }
    int dim_q() const { return static_cast<int>(basis_q.cols()); }

    Vec project_p(const Vec& v) const { return basis_p * (basis_p.transpose() * v); }
    Vec project_q(const Vec& v) const {
        if (basis_q.cols() == 0) return Vec::Zero(v.size());
        return basis_q * (basis_q.transpose() * v);
    }
    /// Coordinates of the P-projection in the basis of P.
    Vec coords_p(const Vec& v) const { return basis_p.transpose() * v; }
};

namespace detail {

/// Stabilized Gram-Schmidt with one re-orthogonalization pass. Returns the
/// orthonormalized columns; vectors whose residual falls below
/// drop_tol * (largest input norm) are rejected as dependent.
inline Mat gram_schmidt(const std::vector<Vec>& input, double drop_tol, int* dropped = nullptr) {
    const int n = input.empty() ? 0 : static_cast<int>(input.front().size());
    Mat basis(n, static_cast<int>(input.size()));
    int cols = 0;
    double scale = 0.0;
    for (const Vec& v : input) scale = std::max(scale, v.norm());
    if (scale == 0.0) scale = 1.0;
    int drop_count = 0;
    for (const Vec& v : input) {
        Vec r = v;
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < cols; ++j) {
                r -= basis.col(j).dot(r) * basis.col(j);
            }
        }
        const double nr = r.norm();
        if (nr <= drop_tol * scale) {
            ++drop_count;
            continue;
        }
        basis.col(cols++) = r / nr;
    }
    if (dropped) *dropped = drop_count;
    basis.conservativeResize(n, cols);
    return basis;
}

/// Extends an orthonormal column set to a full orthonormal basis of R^n and
/// returns the added columns (the orthogonal complement).
inline Mat orthogonal_complement(const Mat& basis) {
    const int n = static_cast<int>(basis.rows());
    const int want = n - static_cast<int>(basis.cols());
    Mat comp(n, want);
    Mat current = basis;
    for (int added = 0; added < want; ++added) {
        int best_j = -1;
        double best_norm = -1.0;
        Vec best_r;
        for (int j = 0; j < n; ++j) {
            Vec r = Vec::Unit(n, j);
            for (int pass = 0; pass < 2; ++pass) {
                for (int c = 0; c < current.cols(); ++c) {
                    r -= current.col(c).dot(r) * current.col(c);
                }
            }
            const double nr = r.norm();
            if (nr > best_norm) {
                best_norm = nr;
                best_j = j;
                best_r = r;
            }
        }
        (void)best_j;
        comp.col(added) = best_r / best_norm;
        current.conservativeResize(n, current.cols() + 1);
        current.col(current.cols() - 1) = comp.col(added);
    }
    return comp;
}

}  // namespace detail

/// Builds the (P, Q, h) frame of a configuration and checks its invariants:
/// P and Q orthogonal, all directions share one Q-projection h with norm
/// below 1, and all P-projections have equal length.
inline Frame build_frame(const Configuration& a, double sigma_tol = kDefaultSigmaTol) {
    const int k = a.k();
    const int n = a.dim();
    std::vector<Vec> span;
    span.reserve(static_cast<std::size_t>(k - 1));
    for (int i = 1; i < k; ++i) span.push_back(a.dir(i) - a.dir(0));

    int dropped = 0;
    Frame frame;
    frame.basis_p = detail::gram_schmidt(span, sigma_tol, &dropped);
    if (dropped > 0 || frame.basis_p.cols() != k - 1) {
        throw std::invalid_argument("build_frame: configuration is numerically degenerate");
    }
    frame.basis_q = detail::orthogonal_complement(frame.basis_p);
    frame.h = frame.project_q(a.dir(0));

    // Invariant checks.
    if (frame.basis_q.cols() > 0) {
        const double cross = (frame.basis_p.transpose() * frame.basis_q).cwiseAbs().maxCoeff();
        if (cross > 1e-9) throw std::runtime_error("build_frame: P and Q bases not orthogonal");
    }
    double p_len_min = std::numeric_limits<double>::infinity();
    double p_len_max = 0.0;
    for (int i = 0; i < k; ++i) {
        if ((frame.project_q(a.dir(i)) - frame.h).norm() > 1e-6) {
            throw std::runtime_error("build_frame: directions do not share a Q-projection");
        }
        const double len = frame.project_p(a.dir(i)).norm();
        p_len_min = std::min(p_len_min, len);
        p_len_max = std::max(p_len_max, len);
    }
    if (p_len_max - p_len_min > 1e-6) {
        throw std::runtime_error("build_frame: P-projections have unequal lengths");
    }
    if (frame.h.norm() >= 1.0) {
        throw std::runtime_error("build_frame: Q-projection of directions has norm >= 1");
    }
    return frame;
}

/// Projection spread functional: for w in P \ {0},
///   f(w) = max_i <w, pi_P(a_i)> - min_i <w, pi_P(a_i)>.
/// Strictly positive for generic configurations, and positively homogeneous
/// of degree one.
inline double f_of_w(const Vec& w, const Configuration& a, const Frame& frame) {
    if (w.norm() == 0.0) throw std::invalid_argument("f_of_w: w must be nonzero");
    if (frame.project_q(w).norm() > 1e-9) {
        throw std::invalid_argument("f_of_w: w must lie in P");
    }
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.k(); ++i) {
        const double d = w.dot(frame.project_p(a.dir(i)));
        hi = std::max(hi, d);
        lo = std::min(lo, d);
    }
    return hi - lo;
}

namespace detail {

/// f restricted to unit vectors of P, in P-coordinates.
inline double f_unit(const Vec& u, const Mat& proj_coords) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < proj_coords.cols(); ++i) {
        const double d = u.dot(proj_coords.col(i));
        hi = std::max(hi, d);
        lo = std::min(lo, d);
    }
    return hi - lo;
}

/// Derivative-free descent on the unit sphere: axis moves re-normalized to
/// the sphere, step halving on stall.
inline double sphere_pattern_search(Vec u, const Mat& proj_coords, double* value_out) {
    const int d = static_cast<int>(u.size());
    double value = f_unit(u, proj_coords);
    double step = 0.5;
    const int max_sweeps = 400;
    for (int sweep = 0; sweep < max_sweeps && step > 1e-13; ++sweep) {
        bool improved = false;
        for (int axis = 0; axis < d; ++axis) {
            for (double sign : {1.0, -1.0}) {
                Vec cand = u + sign * step * Vec::Unit(d, axis);
                const double nc = cand.norm();
                if (nc < 1e-12) continue;
                cand /= nc;
                const double v = f_unit(cand, proj_coords);
                if (v < value - 1e-16) {
                    value = v;
                    u = cand;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    if (value_out) *value_out = value;
    return value;
}

/// Deterministic seed directions on S^{d-1}: the full set {-1,+1} for d = 1,
/// an even angular grid for d = 2, and a pinned pseudo-random net above.
inline std::vector<Vec> seed_directions(int d, int count) {
    std::vector<Vec> seeds;
    if (d == 1) {
        seeds.push_back(Vec::Constant(1, 1.0));
        seeds.push_back(Vec::Constant(1, -1.0));
        return seeds;
    }
    if (d == 2) {
        seeds.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const double th = 2.0 * M_PI * i / count;
            Vec u(2);
            u << std::cos(th), std::sin(th);
            seeds.push_back(u);
        }
        return seeds;
    }
    SplitMix64 rng(0x5eedbeefULL + static_cast<std::uint64_t>(d));
    seeds.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) seeds.push_back(rng.unit_vector(d));
    return seeds;
}

}  // namespace detail

/// The configuration's separation constant
///   c = inf { f(w) : w in P, 1/2 <= ||w|| <= 1 }.
/// By homogeneity the infimum sits on ||w|| = 1/2, so c equals half the
/// minimum of f over unit vectors of P. The minimum is located by
/// multi-start pattern search seeded on a deterministic grid of
/// 2^(k-1) * 32 directions.
inline double separation_constant(const Configuration& a,
                                  double sigma_tol = kDefaultSigmaTol) {
    const Frame frame = build_frame(a, sigma_tol);
    const int dim_p = frame.dim_p();
    Mat proj_coords(dim_p, a.k());
    for (int i = 0; i < a.k(); ++i) {
        proj_coords.col(i) = frame.coords_p(a.dir(i));
    }
    if (dim_p == 1) {
        // P is a line: only two unit vectors, and f(u) = f(-u).
        Vec u = Vec::Constant(1, 1.0);
        return 0.5 * detail::f_unit(u, proj_coords);
    }
    const int seed_count = (1 << (a.k() - 1)) * 32;
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& seed : detail::seed_directions(dim_p, seed_count)) {
        double v;
        detail::sphere_pattern_search(seed, proj_coords, &v);
        best = std::min(best, v);
    }
    return 0.5 * best;
}

/// Membership in the open cone P_r = { v != 0 : dist(v, P) / ||v|| < r }.
inline bool in_cone(const Vec& v, const Frame& frame, double r) {
    if (r <= 0.0 || r >= 1.0) throw std::invalid_argument("in_cone: need 0 < r < 1");
    const double nv = v.norm();
    if (nv == 0.0) throw std::invalid_argument("in_cone: v must be nonzero (the cone excludes 0)");
    return frame.project_q(v).norm() / nv < r;
}

struct SeparationResult {
    int i_max = -1;
    int i_min = -1;
    double gap = 0.0;
};

/// For a cone direction v (dist(v, P)/||v|| < 1/2), the spread of the
/// cosines cos angle(v, 0, a_i) exceeds the separation constant. Returns
/// the extremal indices and the spread.
inline SeparationResult separation_check(const Vec& v, const Configuration& a,
                                         const Frame& frame, double c) {
    (void)c;
    const double nv = v.norm();
    if (nv == 0.0) throw std::invalid_argument("separation_check: v must be nonzero");
    const double ratio_q = frame.project_q(v).norm() / nv;
    if (ratio_q >= 0.5) {
        throw std::invalid_argument(
            "separation_check: v is outside every cone P_r with r < 1/2");
    }
    SeparationResult res;
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.k(); ++i) {
        const double cosv = v.dot(a.dir(i)) / nv;
        if (cosv > hi) {
            hi = cosv;
            res.i_max = i;
        }
        if (cosv < lo) {
            lo = cosv;
            res.i_min = i;
        }
    }
    res.gap = hi - lo;
    return res;
}

}  // namespace medax
