#pragma once

#include "medax/certificate.hpp"
#include "medax/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_set>
#include <vector>

namespace medax {

/// Ordered sample pair flagged by an audit.
struct Violation {
    int i = 0;
    int j = 0;
    bool operator==(const Violation&) const = default;
};

/// Checks the chart's cone-avoidance property: for every ordered pair
/// (x, x') with 0 < ||x' - x|| < t, the displacement must not fall in the
/// open cone P_r of the chart configuration. A correct extraction yields an
/// empty list; pairs are pruned with a spatial index at radius t.
inline std::vector<Violation> cone_avoidance_audit(const std::vector<MedialSample>& samples,
                                                   const Certificate& cert,
                                                   double sigma_tol = kDefaultSigmaTol) {
    std::vector<Violation> out;
    if (samples.size() < 2) return out;
    const Frame frame = build_frame(cert.a, sigma_tol);
    std::vector<Vec> positions;
    positions.reserve(samples.size());
    for (const auto& s : samples) positions.push_back(s.x);
    KdTree tree(positions);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j : tree.within(samples[i].x, cert.t)) {
            if (j == i) continue;
            const Vec v = samples[j].x - samples[i].x;
            const double len = v.norm();
            if (len == 0.0 || len >= cert.t) continue;
            if (in_cone(v, frame, cert.r)) {
                out.push_back(Violation{static_cast<int>(i), static_cast<int>(j)});
            }
        }
    }
    return out;
}

struct LipschitzFit {
    double L = 0.0;
    int witness_i = -1;
    int witness_j = -1;
    std::vector<Violation> injectivity;  // pi_Q collapse with a real pi_P gap
};

/// Measures the chart cluster as a graph over Q: the worst ratio
/// ||pi_P(x - x')|| / ||pi_Q(x - x')|| over pairs closer than t. Under the
/// cone-avoidance property the ratio is bounded by sqrt(1 - r^2) / r.
/// A vanishing pi_Q difference with a genuine pi_P difference breaks graph
/// injectivity and is reported as a violation rather than thrown.
inline LipschitzFit lipschitz_graph_fit(const std::vector<MedialSample>& samples,
                                        const Frame& frame, double r, double t) {
    (void)r;
    LipschitzFit fit;
    if (samples.size() < 2) return fit;
    std::vector<Vec> positions;
    positions.reserve(samples.size());
    for (const auto& s : samples) positions.push_back(s.x);
    KdTree tree(positions);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j : tree.within(samples[i].x, t)) {
            if (j <= i) continue;
            const Vec v = samples[j].x - samples[i].x;
            const double len = v.norm();
            if (len == 0.0 || len >= t) continue;
            const double dp = frame.project_p(v).norm();
            const double dq = frame.project_q(v).norm();
            if (dq < 1e-12) {
                if (dp > 1e-9) {
                    fit.injectivity.push_back(Violation{static_cast<int>(i),
                                                        static_cast<int>(j)});
                }
                continue;
            }
            const double ratio = dp / dq;
            if (ratio > fit.L) {
                fit.L = ratio;
                fit.witness_i = static_cast<int>(i);
                fit.witness_j = static_cast<int>(j);
            }
        }
    }
    return fit;
}

/// Box-counting dimension estimate: occupied axis-aligned boxes per scale
/// and the least-squares slope of log(count) against log(1/scale).
struct DimensionEstimate {
    double value = 0.0;
    std::vector<double> scales;
    std::vector<long> counts;
    double fit_r2 = 1.0;
    long n_points = 0;
};

inline DimensionEstimate box_dimension(const std::vector<Vec>& points, double min_scale,
                                       double max_scale, int n_scales) {
    if (points.size() < 10) {
        throw std::invalid_argument("box_dimension: need at least 10 points");
    }
    if (n_scales < 4) throw std::invalid_argument("box_dimension: need at least 4 scales");
    if (!(max_scale / min_scale >= 16.0)) {
        throw std::invalid_argument("box_dimension: scale range must span a factor of 16");
    }
    DimensionEstimate est;
    est.n_points = static_cast<long>(points.size());

    const int n = static_cast<int>(points.front().size());
    Vec origin = points.front();
    for (const Vec& p : points) origin = origin.cwiseMin(p);

    const double ratio = std::pow(max_scale / min_scale, 1.0 / (n_scales - 1));
    for (int si = 0; si < n_scales; ++si) {
        const double scale = min_scale * std::pow(ratio, si);
        std::unordered_set<std::string> boxes;
        std::string key;
        for (const Vec& p : points) {
            key.clear();
            for (int a = 0; a < n; ++a) {
                const long idx = static_cast<long>(std::floor((p[a] - origin[a]) / scale));
                key += std::to_string(idx);
                key += ',';
            }
            boxes.insert(key);
        }
        est.scales.push_back(scale);
        est.counts.push_back(static_cast<long>(boxes.size()));
    }

    // least-squares fit of log(count) on log(1/scale)
    const int m = n_scales;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        const double x = std::log(1.0 / est.scales[static_cast<std::size_t>(i)]);
        const double y = std::log(static_cast<double>(est.counts[static_cast<std::size_t>(i)]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = m * sxx - sx * sx;
    est.value = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - est.value * sx) / m;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / m;
    for (int i = 0; i < m; ++i) {
        const double x = std::log(1.0 / est.scales[static_cast<std::size_t>(i)]);
        const double y = std::log(static_cast<double>(est.counts[static_cast<std::size_t>(i)]));
        const double fitv = est.value * x + intercept;
        ss_res += (y - fitv) * (y - fitv);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    est.fit_r2 = ss_tot < 1e-30 ? 1.0 : 1.0 - ss_res / ss_tot;
    return est;
}

/// The affine flat of points equidistant from a generic k-subset: solution
/// set of <x, 2(p_i - p_1)> = ||p_i||^2 - ||p_1||^2. For a generic subset the
/// system has rank exactly k-1, so the flat has dimension n-k+1.
struct EquidistanceFlat {
    Vec base;        // least-norm particular solution
    Mat directions;  // orthonormal basis of the flat's direction space
    int rank = 0;
};

inline EquidistanceFlat equidistance_flat(const std::vector<Vec>& subset,
                                          double rank_tol = 1e-9) {
    const int k = static_cast<int>(subset.size());
    if (k < 2) throw std::invalid_argument("equidistance_flat: need at least 2 points");
    const int n = static_cast<int>(subset.front().size());
    Mat A(k - 1, n);
    Vec b(k - 1);
    for (int i = 1; i < k; ++i) {
        A.row(i - 1) = 2.0 * (subset[static_cast<std::size_t>(i)] - subset[0]).transpose();
        b[i - 1] = subset[static_cast<std::size_t>(i)].squaredNorm() - subset[0].squaredNorm();
    }
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv[0] : 0.0;
    EquidistanceFlat flat;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > rank_tol * std::max(top, 1e-300)) ++flat.rank;
    }
    // least-norm solution via the truncated pseudo-inverse
    Vec y = svd.matrixU().transpose() * b;
    Vec z = Vec::Zero(n);
    for (int i = 0; i < flat.rank; ++i) z[i] = y[i] / sv[i];
    flat.base = svd.matrixV() * z;
    flat.directions = svd.matrixV().rightCols(n - flat.rank);
    return flat;
}

/// Independent oracle for finite sites: enumerates generic k-subsets, solves
/// each equidistance flat, samples the flat inside the region at the given
/// spacing, and keeps points whose common subset distance is realized as the
/// distance to the whole site set (within 1e-9). Degenerate subsets are
/// skipped, never solved.
inline std::vector<Vec> voronoi_mk_oracle(const std::vector<Vec>& sites, int k,
                                          const Box& region, double spacing,
                                          double sigma_tol = kDefaultSigmaTol) {
    if (sites.size() > 64) {
        throw std::invalid_argument("voronoi_mk_oracle: at most 64 sites");
    }
    const int n = region.dim();
    if (k < 2 || k > n + 1) throw std::invalid_argument("voronoi_mk_oracle: k out of range");
    region.validate();
    if (spacing <= 0.0) throw std::invalid_argument("voronoi_mk_oracle: spacing must be positive");

    const int m = static_cast<int>(sites.size());
    auto site_distance = [&](const Vec& x) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec& p : sites) best = std::min(best, (p - x).norm());
        return best;
    };

    // corner set of the region, for bounding lattice ranges on each flat
    std::vector<Vec> corners;
    const long corner_count = 1L << n;
    for (long mask = 0; mask < corner_count; ++mask) {
        Vec c(n);
        for (int a = 0; a < n; ++a) c[a] = (mask >> a) & 1 ? region.hi[a] : region.lo[a];
        corners.push_back(std::move(c));
    }

    std::vector<Vec> result;
    std::vector<int> idx(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
    if (m < k) return result;
    for (;;) {
        std::vector<Vec> subset;
        subset.reserve(static_cast<std::size_t>(k));
        for (int i : idx) subset.push_back(sites[static_cast<std::size_t>(i)]);
        if (is_generic(subset, sigma_tol)) {
            EquidistanceFlat flat = equidistance_flat(subset);
            if (flat.rank == k - 1) {
                const int fdim = n - flat.rank;
                // lattice ranges that cover the region's projection
                std::vector<long> range(static_cast<std::size_t>(fdim), 0);
                for (int j = 0; j < fdim; ++j) {
                    double extent = 0.0;
                    for (const Vec& c : corners) {
                        extent = std::max(extent,
                                          std::abs(flat.directions.col(j).dot(c - flat.base)));
                    }
                    range[static_cast<std::size_t>(j)] =
                        static_cast<long>(std::ceil(extent / spacing));
                }
                long total = 1;
                for (long r : range) total *= 2 * r + 1;
                for (long flatpos = 0; flatpos < total; ++flatpos) {
                    long rem = flatpos;
                    Vec x = flat.base;
                    for (int j = 0; j < fdim; ++j) {
                        const long steps = 2 * range[static_cast<std::size_t>(j)] + 1;
                        const long ci = rem % steps - range[static_cast<std::size_t>(j)];
                        rem /= steps;
                        x += static_cast<double>(ci) * spacing * flat.directions.col(j);
                    }
                    if (!region.contains(x)) continue;
                    const double common = (x - subset[0]).norm();
                    if (std::abs(common - site_distance(x)) <= 1e-9) {
                        result.push_back(std::move(x));
                    }
                }
            }
        }
        int pos = k - 1;
        while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<std::size_t>(pos)];
        for (int i = pos + 1; i < k; ++i) {
            idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
        }
    }

    // deduplicate coincident flat samples from different subsets
    std::sort(result.begin(), result.end(), lex_less);
    std::vector<Vec> unique;
    for (const Vec& p : result) {
        if (!unique.empty() && (unique.back() - p).norm() <= 1e-9) continue;
        unique.push_back(p);
    }
    return unique;
}

/// Default box-counting scale policy for extracted sample sets.
struct DimensionScalePolicy {
    double min_scale = 0.0;
    double max_scale = 0.0;
    int n_scales = 8;

    static DimensionScalePolicy for_run(double spacing, const Box& bbox) {
        DimensionScalePolicy p;
        p.min_scale = 4.0 * spacing;
        p.max_scale = std::max(bbox.diameter() / 4.0, p.min_scale * 16.0);
        return p;
    }
};

inline std::optional<DimensionEstimate> estimate_dimension(const std::vector<Vec>& points,
                                                           const DimensionScalePolicy& policy) {
    if (points.size() < 10) return std::nullopt;
    return box_dimension(points, policy.min_scale, policy.max_scale, policy.n_scales);
}

/// One stratum L_i = (samples at level n-i+1) minus (samples at level
/// n-i+2), matched at half a sampling cell.
struct Stratum {
    int i = 0;        // expected dimension of the stratum
    int k_level = 0;  // the medial-axis level it came from
    std::vector<Vec> points;
    std::optional<DimensionEstimate> dimension;
};

struct LevelSummary {
    int k = 0;
    long sample_count = 0;
    long chart_count = 0;
    std::optional<DimensionEstimate> dimension;
};

struct StratumReport {
    std::vector<LevelSummary> levels;
    std::vector<Stratum> strata;
    double spacing = 0.0;
};

/// Runs the extractor at every level k in [2, n+1], forms the strata by
/// half-cell set difference between consecutive levels, and attaches
/// box-counting estimates to every stratum large enough to support one.
inline StratumReport stratification_report(const ClosedSetModel& model,
                                           const SamplerSpec& sampler, double tau = 0.0,
                                           double sigma_tol = kDefaultSigmaTol) {
    const int n = model.dim();
    StratumReport report;
    report.spacing = sampler.spacing();
    const double match_radius = 0.5 * report.spacing;
    const DimensionScalePolicy policy =
        DimensionScalePolicy::for_run(report.spacing, sampler.bbox);

    std::vector<std::vector<Vec>> level_points(static_cast<std::size_t>(n + 2));
    for (int k = 2; k <= n + 1; ++k) {
        auto res = extract_mk(model, sampler, k, tau, sigma_tol);
        LevelSummary summary;
        summary.k = k;
        summary.sample_count = static_cast<long>(res.samples.size());
        summary.chart_count = static_cast<long>(res.charts.size());
        std::vector<Vec>& pts = level_points[static_cast<std::size_t>(k)];
        pts.reserve(res.samples.size());
        for (const auto& s : res.samples) pts.push_back(s.x);
        summary.dimension = estimate_dimension(pts, policy);
        report.levels.push_back(std::move(summary));
    }

    for (int k = 2; k <= n + 1; ++k) {
        Stratum stratum;
        stratum.k_level = k;
        stratum.i = n - k + 1;
        const auto& own = level_points[static_cast<std::size_t>(k)];
        if (k == n + 1) {
            stratum.points = own;
        } else {
            const auto& next = level_points[static_cast<std::size_t>(k + 1)];
            for (const Vec& p : own) {
                bool matched = false;
                for (const Vec& q : next) {
                    if ((p - q).norm() <= match_radius) {
                        matched = true;
                        break;
                    }
                }
                if (!matched) stratum.points.push_back(p);
            }
        }
        stratum.dimension = estimate_dimension(stratum.points, policy);
        report.strata.push_back(std::move(stratum));
    }
    return report;
}

}  // namespace medax
