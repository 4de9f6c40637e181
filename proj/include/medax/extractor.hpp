#pragma once

#include "medax/certificate.hpp"
#include "medax/configuration.hpp"
#include "medax/shapes.hpp"

#include <atomic>
#include <cstdlib>
#include <functional>
#include <optional>
#include <thread>

namespace medax {

/// One sampled point of the k-medial axis: position, distance, the unit
/// directions toward its near-nearest points, the largest generic direction
/// count, and the chart configuration chosen from them.
struct MedialSample {
    Vec x;
    double d = 0.0;
    DirectionSet B;
    std::vector<Vec> witnesses;  // realizers behind B, same order
    int k_max = 0;
    std::optional<Configuration> chart_config;
    double residual = 0.0;
    bool refined = false;
    int chart_id = -1;
};

/// Chart window in configuration space x distance: a sample belongs when its
/// distance is delta-close to d and its direction set has a generic k-subset
/// eps-close to a.
struct ChartKey {
    Configuration a;
    double d = 0.0;
    double eps = 0.0;
    double delta = 0.0;
};

namespace detail {

/// Lexicographically smallest generic k-subset of sorted unit directions
/// (indices into `dirs`). Exact enumeration up to 12 directions; greedy
/// rank-growing selection beyond, where every prefix of the greedy chain is
/// generic by construction.
inline std::optional<std::vector<int>> generic_subset(const std::vector<Vec>& dirs, int k,
                                                      double sigma_tol) {
    const int m = static_cast<int>(dirs.size());
    if (k < 1 || k > m) return std::nullopt;
    if (k == 1) return std::vector<int>{0};
    if (m <= 12) {
        std::vector<int> idx(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (;;) {
            std::vector<Vec> subset;
            subset.reserve(static_cast<std::size_t>(k));
            for (int i : idx) subset.push_back(dirs[static_cast<std::size_t>(i)]);
            if (is_generic(subset, sigma_tol)) return idx;
            // next combination in lexicographic order
            int pos = k - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == m - k + pos) --pos;
            if (pos < 0) return std::nullopt;
            ++idx[static_cast<std::size_t>(pos)];
            for (int i = pos + 1; i < k; ++i) {
                idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
            }
        }
    }
    // greedy: keep directions that raise the affine rank
    std::vector<int> chain;
    std::vector<Vec> chosen;
    for (int i = 0; i < m && static_cast<int>(chain.size()) < k; ++i) {
        chosen.push_back(dirs[static_cast<std::size_t>(i)]);
        if (affine_rank(chosen, sigma_tol) == static_cast<int>(chosen.size()) - 1) {
            chain.push_back(i);
        } else {
            chosen.pop_back();
        }
    }
    if (static_cast<int>(chain.size()) < k) return std::nullopt;
    return chain;
}

/// Largest generic subset (greedy rank chain capped at n+1); used both for
/// k_max and for the deterministic chart configuration.
inline std::vector<int> maximal_generic_subset(const std::vector<Vec>& dirs,
                                               double sigma_tol) {
    const int m = static_cast<int>(dirs.size());
    if (m == 0) return {};
    const int n = static_cast<int>(dirs.front().size());
    const int cap = std::min(m, n + 1);
    if (m <= 12) {
        for (int k = cap; k >= 2; --k) {
            if (auto sel = generic_subset(dirs, k, sigma_tol)) return *sel;
        }
        return {0};
    }
    std::vector<int> chain;
    std::vector<Vec> chosen;
    for (int i = 0; i < m && static_cast<int>(chain.size()) < cap; ++i) {
        chosen.push_back(dirs[static_cast<std::size_t>(i)]);
        if (affine_rank(chosen, sigma_tol) == static_cast<int>(chosen.size()) - 1) {
            chain.push_back(i);
        } else {
            chosen.pop_back();
        }
    }
    return chain;
}

}  // namespace detail

/// Classifies a point against the model: direction set from the tau-relaxed
/// nearest candidates, maximal generic direction count, and the
/// deterministic (lexicographic) chart configuration.
inline MedialSample classify_point(const ClosedSetModel& model, const Vec& x, double tau,
                                   double sigma_tol = kDefaultSigmaTol) {
    MedialSample s;
    s.x = x;
    NearSet ns = model.near_set(x, tau);
    s.d = ns.d;
    if (s.d <= 0.0) {
        throw std::invalid_argument("classify_point: x lies in E, direction set undefined");
    }
    // unit directions toward candidates, sorted lexicographically with
    // witnesses kept aligned
    std::vector<std::pair<Vec, Vec>> pairs;  // (dir, witness)
    pairs.reserve(ns.points.size());
    for (const Vec& y : ns.points) {
        Vec delta = y - x;
        pairs.emplace_back(delta / delta.norm(), y);
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
    s.B.unit_tol = 1e-6;
    for (auto& [d, w] : pairs) {
        s.B.dirs.push_back(std::move(d));
        s.witnesses.push_back(std::move(w));
    }
    const auto maximal = detail::maximal_generic_subset(s.B.dirs, sigma_tol);
    s.k_max = static_cast<int>(maximal.size());
    if (s.k_max >= 2) {
        std::vector<Vec> cfg;
        for (int i : maximal) cfg.push_back(s.B.dirs[static_cast<std::size_t>(i)]);
        s.chart_config = Configuration::from_directions(std::move(cfg), sigma_tol);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Vec& w : s.witnesses) {
        const double dist = (w - x).norm();
        lo = std::min(lo, dist);
        hi = std::max(hi, dist);
    }
    s.residual = hi - lo;
    return s;
}

/// Chart membership test: the distance window plus a generic k-subset of the
/// sample's directions within eps of the chart configuration. The subset
/// search walks assignments of chart directions to nearby sample directions,
/// which enumerates exactly the pairs (subset, relabeling) that can realize
/// a configuration distance below eps.
inline bool matches_chart(const MedialSample& sample, const ChartKey& key,
                          double sigma_tol = kDefaultSigmaTol) {
    const int k = key.a.k();
    if (sample.k_max < k) return false;
    if (std::abs(sample.d - key.d) >= key.delta) return false;
    const int m = sample.B.size();
    if (m < k) return false;

    // candidate sample directions per chart direction, nearest first
    std::vector<std::vector<int>> candidates(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        std::vector<std::pair<double, int>> near;
        for (int j = 0; j < m; ++j) {
            const double dist = (key.a.dir(i) - sample.B.dirs[static_cast<std::size_t>(j)]).norm();
            if (dist < key.eps) near.emplace_back(dist, j);
        }
        if (near.empty()) return false;
        std::sort(near.begin(), near.end());
        for (auto& [dist, j] : near) candidates[static_cast<std::size_t>(i)].push_back(j);
    }

    std::vector<int> assignment(static_cast<std::size_t>(k), -1);
    std::vector<char> used(static_cast<std::size_t>(m), 0);
    long budget = 200000;
    std::function<bool(int)> dfs = [&](int i) -> bool {
        if (budget-- <= 0) return false;
        if (i == k) {
            std::vector<Vec> subset;
            subset.reserve(static_cast<std::size_t>(k));
            for (int j : assignment) subset.push_back(sample.B.dirs[static_cast<std::size_t>(j)]);
            return is_generic(subset, sigma_tol);
        }
        for (int j : candidates[static_cast<std::size_t>(i)]) {
            if (used[static_cast<std::size_t>(j)]) continue;
            used[static_cast<std::size_t>(j)] = 1;
            assignment[static_cast<std::size_t>(i)] = j;
            if (dfs(i + 1)) return true;
            used[static_cast<std::size_t>(j)] = 0;
        }
        return false;
    };
    return dfs(0);
}

struct RefineResult {
    Vec x;
    double residual = 0.0;
    bool refined = false;
};

namespace detail {

inline double spread(const Vec& x, const std::vector<Vec>& tracked) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Vec& y : tracked) {
        const double d = (y - x).norm();
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    return hi - lo;
}

inline bool tracked_valid(const ClosedSetModel& model, const Vec& x,
                          const std::vector<Vec>& tracked, double tau_cur) {
    double lo = std::numeric_limits<double>::infinity();
    for (const Vec& y : tracked) lo = std::min(lo, (y - x).norm());
    return lo <= model.distance(x) + tau_cur;
}

/// Tracked candidate set at x: realizers behind the lexicographically
/// smallest generic k-subset of directions.
inline std::optional<std::vector<Vec>> track_candidates(const ClosedSetModel& model,
                                                        const Vec& x, int k, double tau,
                                                        double sigma_tol) {
    if (model.distance(x) <= 0.0) return std::nullopt;
    NearSet ns = model.near_set(x, tau);
    if (static_cast<int>(ns.points.size()) < k) return std::nullopt;
    std::vector<std::pair<Vec, Vec>> pairs;
    for (const Vec& y : ns.points) {
        Vec delta = y - x;
        pairs.emplace_back(delta / delta.norm(), y);
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return lex_less(a.first, b.first); });
    std::vector<Vec> dirs;
    dirs.reserve(pairs.size());
    for (const auto& [d, w] : pairs) dirs.push_back(d);
    auto sel = generic_subset(dirs, k, sigma_tol);
    if (!sel) return std::nullopt;
    std::vector<Vec> tracked;
    tracked.reserve(static_cast<std::size_t>(k));
    for (int i : *sel) tracked.push_back(pairs[static_cast<std::size_t>(i)].second);
    return tracked;
}

}  // namespace detail

/// Pulls a detected point onto the local equal-distance locus of k tracked
/// near-nearest realizers: derivative-free coordinate descent on the
/// distance spread, with step halving (64 sweeps max). The tracking slack
/// shrinks alongside the step; losing the candidate set triggers a restart
/// with a freshly tracked set, and unresolved loss falls back to x0 flagged
/// unrefined.
inline RefineResult refine_sample(const ClosedSetModel& model, const Vec& x0, int k,
                                  double tau, double sigma_tol = kDefaultSigmaTol) {
    auto tracked0 = detail::track_candidates(model, x0, k, tau, sigma_tol);
    if (!tracked0) {
        return RefineResult{x0, 0.0, false};
    }
    const double scale = std::max({1.0, x0.norm(), model.distance(x0)});
    const double tau_floor = std::max(tau / 256.0, 1e-12 * scale);
    // Refinement is local: the equal-distance locus that triggered detection
    // passes within ~tau of x0, so cap the total displacement. Without the
    // cap the spread objective can decay along the locus toward infinity.
    const double trust_radius = 2.0 * tau;
    const int n = static_cast<int>(x0.size());

    Vec x = x0;
    std::vector<Vec> tracked = *tracked0;
    const double initial_spread = detail::spread(x0, *tracked0);
    bool lost = false;

    for (int restart = 0; restart < 3; ++restart) {
        double step = tau;
        double tau_cur = tau;
        double value = detail::spread(x, tracked);
        lost = false;
        for (int sweep = 0; sweep < 64 && step > 1e-12 * scale; ++sweep) {
            Vec best_move;
            double best_value = value;
            for (int axis = 0; axis < n; ++axis) {
                for (double sign : {1.0, -1.0}) {
                    // the quarter step lets the cross-locus snap win over the
                    // slow decay along the locus before the step shrinks
                    for (double frac : {1.0, 0.25}) {
                        Vec cand = x + sign * frac * step * Vec::Unit(n, axis);
                        if (std::abs(cand[axis] - x0[axis]) > trust_radius) continue;
                        const double v = detail::spread(cand, tracked);
                        if (v < best_value - 1e-18) {
                            best_value = v;
                            best_move = cand;
                        }
                    }
                }
            }
            if (best_move.size() > 0) {
                if (!detail::tracked_valid(model, best_move, tracked, tau_cur)) {
                    lost = true;
                    break;
                }
                x = best_move;
                value = best_value;
            } else {
                step *= 0.5;
                tau_cur = std::max(tau_cur * 0.5, tau_floor);
            }
        }
        if (!lost) {
            // Phase 2: the equal-distance locus of the fixed tracked points is
            // an affine flat, and moving along its tangent directions keeps
            // the spread exactly. Slide back toward x0 to shed the tangential
            // drift picked up during large steps; the endpoint approximates
            // the orthogonal projection of x0 onto the locus, so consecutive
            // grid samples stay evenly spread along it.
            std::vector<Vec> normal_span;
            for (std::size_t i = 1; i < tracked.size(); ++i) {
                normal_span.push_back(tracked[i] - tracked[0]);
            }
            const Mat normal_basis = detail::gram_schmidt(normal_span, 1e-9);
            const Mat tangent = detail::orthogonal_complement(normal_basis);
            const double spread_tol = std::max(4.0 * value, 1e-11 * scale);
            double step2 = tau;
            double dist0 = (x - x0).norm();
            for (int sweep = 0; sweep < 32 && tangent.cols() > 0 && step2 > 1e-12 * scale;
                 ++sweep) {
                Vec best_move;
                double best_dist = dist0;
                for (int dir = 0; dir < tangent.cols(); ++dir) {
                    for (double sign : {1.0, -1.0}) {
                        for (double frac : {1.0, 0.25}) {
                            Vec cand = x + sign * frac * step2 * Vec(tangent.col(dir));
                            bool in_trust = true;
                            for (int a = 0; a < n; ++a) {
                                if (std::abs(cand[a] - x0[a]) > trust_radius) in_trust = false;
                            }
                            if (!in_trust) continue;
                            if (detail::spread(cand, tracked) > spread_tol) continue;
                            const double dc = (cand - x0).norm();
                            if (dc < best_dist - 1e-18) {
                                best_dist = dc;
                                best_move = cand;
                            }
                        }
                    }
                }
                if (best_move.size() > 0 && detail::tracked_valid(model, best_move, tracked, tau)) {
                    x = best_move;
                    dist0 = best_dist;
                } else {
                    step2 *= 0.5;
                }
            }
            return RefineResult{x, detail::spread(x, tracked), true};
        }
        // re-track at the current point and retry
        auto fresh = detail::track_candidates(model, x, k, tau, sigma_tol);
        if (!fresh) break;
        tracked = *fresh;
    }
    return RefineResult{x0, initial_spread, false};
}

/// How the ambient space is sampled: a full grid over the box or seeded
/// uniform points.
struct SamplerSpec {
    enum class Kind { Grid, Random };
    Kind kind = Kind::Grid;
    Box bbox;
    int grid_res = 128;
    long count = 0;
    std::uint64_t seed = 0;

    /// Characteristic spacing: grid cell edge, or the equivalent for random
    /// sampling (volume per point, n-th root).
    double spacing() const {
        const int n = bbox.dim();
        if (kind == Kind::Grid) {
            double h = 0.0;
            for (int i = 0; i < n; ++i) {
                h = std::max(h, (bbox.hi[i] - bbox.lo[i]) / std::max(1, grid_res - 1));
            }
            return h;
        }
        double volume = 1.0;
        for (int i = 0; i < n; ++i) volume *= (bbox.hi[i] - bbox.lo[i]);
        return std::pow(volume / std::max<long>(1, count), 1.0 / n);
    }
};

struct ChartRecord {
    ChartKey key;
    Certificate cert;
};

struct ExtractionResult {
    std::vector<MedialSample> samples;
    std::vector<ChartRecord> charts;
    int k = 0;
    double tau = 0.0;
    double spacing = 0.0;
};

namespace detail {

inline int thread_budget() {
    if (const char* env = std::getenv("MEDAX_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Deterministic parallel map: each index writes its own slot, so the result
/// is independent of the thread count.
template <typename Fn>
inline void parallel_for(long count, Fn&& fn) {
    const int threads = std::min<long>(thread_budget(), std::max<long>(1, count));
    if (threads <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<long> next(0);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const long chunk = std::max<long>(1, count / (threads * 8));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const long begin = next.fetch_add(chunk);
                if (begin >= count) return;
                const long end = std::min(count, begin + chunk);
                for (long i = begin; i < end; ++i) fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

inline std::vector<Vec> sampler_points(const SamplerSpec& spec) {
    spec.bbox.validate();
    const int n = spec.bbox.dim();
    std::vector<Vec> pts;
    if (spec.kind == SamplerSpec::Kind::Grid) {
        const int g = std::max(2, spec.grid_res);
        long total = 1;
        for (int i = 0; i < n; ++i) total *= g;
        pts.reserve(static_cast<std::size_t>(total));
        for (long flat = 0; flat < total; ++flat) {
            long rem = flat;
            Vec x(n);
            for (int a = 0; a < n; ++a) {
                const long i = rem % g;
                rem /= g;
                x[a] = spec.bbox.lo[a] + (spec.bbox.hi[a] - spec.bbox.lo[a]) * i / (g - 1.0);
            }
            pts.push_back(std::move(x));
        }
        return pts;
    }
    SplitMix64 rng(spec.seed);
    pts.reserve(static_cast<std::size_t>(spec.count));
    for (long i = 0; i < spec.count; ++i) pts.push_back(rng.point_in_box(spec.bbox.lo, spec.bbox.hi));
    return pts;
}

}  // namespace detail

/// Samples the bbox, classifies and refines every candidate, collapses
/// near-duplicate refined samples (half a cell), and assigns each survivor
/// to a chart, creating chart keys with certificate-schedule windows on
/// first use. Deterministic for a fixed scene, sampler, and seed.
inline ExtractionResult extract_mk(const ClosedSetModel& model, const SamplerSpec& sampler,
                                   int k, double tau = 0.0,
                                   double sigma_tol = kDefaultSigmaTol) {
    const int n = model.dim();
    if (k < 2 || k > n + 1) {
        throw std::invalid_argument("extract_mk: k must lie in [2, n+1]");
    }
    if (sampler.bbox.dim() != n) {
        throw std::invalid_argument("extract_mk: bbox dimension does not match the model");
    }
    ExtractionResult result;
    result.k = k;
    result.spacing = sampler.spacing();
    result.tau = tau > 0.0 ? tau : 2.0 * result.spacing;

    const std::vector<Vec> probes = detail::sampler_points(sampler);
    std::vector<std::optional<MedialSample>> slots(probes.size());

    detail::parallel_for(static_cast<long>(probes.size()), [&](long i) {
        const Vec& x0 = probes[static_cast<std::size_t>(i)];
        if (model.distance(x0) <= 0.0) return;
        MedialSample first = classify_point(model, x0, result.tau, sigma_tol);
        if (first.k_max < k) return;
        RefineResult rr = refine_sample(model, x0, k, result.tau, sigma_tol);
        // keep only samples whose refinement settled inside the sampled box
        // and actually reached an equal-distance locus; a residual stuck near
        // tau marks a detection-band tail whose locus was out of reach
        if (!rr.refined || !sampler.bbox.contains(rr.x)) return;
        if (rr.residual > 1e-4 * result.tau) return;
        if (model.distance(rr.x) <= 0.0) return;
        MedialSample final = classify_point(model, rr.x, result.tau, sigma_tol);
        if (final.k_max < k) return;
        final.residual = rr.residual;
        final.refined = rr.refined;
        slots[static_cast<std::size_t>(i)] = std::move(final);
    });

    // collapse near-duplicates in index order, then assign charts greedily
    const double collapse_radius = 0.5 * result.spacing;
    for (auto& slot : slots) {
        if (!slot) continue;
        MedialSample& s = *slot;
        bool duplicate = false;
        for (const MedialSample& kept : result.samples) {
            if ((kept.x - s.x).norm() <= collapse_radius) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) continue;

        int chart_id = -1;
        for (std::size_t c = 0; c < result.charts.size(); ++c) {
            if (matches_chart(s, result.charts[c].key, sigma_tol)) {
                chart_id = static_cast<int>(c);
                break;
            }
        }
        if (chart_id < 0) {
            auto sel = detail::generic_subset(s.B.dirs, k, sigma_tol);
            if (!sel) continue;  // k_max >= k should guarantee this
            std::vector<Vec> cfg;
            for (int idx : *sel) cfg.push_back(s.B.dirs[static_cast<std::size_t>(idx)]);
            ChartRecord record;
            record.key.a = Configuration::from_directions(std::move(cfg), sigma_tol);
            record.key.d = s.d;
            record.cert = make_certificate(record.key.a, record.key.d, sigma_tol);
            record.key.eps = record.cert.eps;
            record.key.delta = record.cert.delta;
            chart_id = static_cast<int>(result.charts.size());
            result.charts.push_back(std::move(record));
        }
        s.chart_id = chart_id;
        result.samples.push_back(std::move(s));
    }
    return result;
}

}  // namespace medax
