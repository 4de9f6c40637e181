// Acceptance suite: runs every shipped correctness criterion end to end and
// prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include "medax/medax.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

using namespace medax;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
    int id;
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<CriterionResult> g_results;

void record(int id, const std::string& name, bool pass, const std::string& detail) {
    g_results.push_back({id, name, pass, detail});
    std::printf("[%s] criterion %2d: %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
}

std::string scene_path(const std::string& name) {
    return std::string(MEDAX_SCENES_DIR) + "/" + name;
}

SamplerSpec grid_sampler(const Box& bbox, int res, std::uint64_t seed = 1) {
    SamplerSpec spec;
    spec.kind = SamplerSpec::Kind::Grid;
    spec.bbox = bbox;
    spec.grid_res = res;
    spec.seed = seed;
    return spec;
}

SamplerSpec scene_sampler(const Scene& scene) {
    SamplerSpec spec;
    spec.bbox = scene.bbox;
    if (scene.sampling.random_count > 0) {
        spec.kind = SamplerSpec::Kind::Random;
        spec.count = scene.sampling.random_count;
    } else {
        spec.kind = SamplerSpec::Kind::Grid;
        spec.grid_res = scene.sampling.grid > 0 ? scene.sampling.grid : 128;
    }
    spec.seed = scene.sampling.seed;
    return spec;
}

/// Degenerate-locus scenes (the circle) run with tau equal to one grid
/// spacing so the full-surface net activates only on the on-node center.
double scene_tau(const std::string& name, const SamplerSpec& sampler) {
    if (name == "circle.json") return sampler.spacing();
    return 0.0;  // default: 2 * spacing
}

struct Cloud {
    std::vector<Vec> sites;
    ExtractionResult res2;
    Box bbox;
};

std::vector<Cloud> g_clouds;  // shared between criteria 1 and 2

Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

double nearest_distance(const Vec& x, const std::vector<Vec>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& p : set) best = std::min(best, (p - x).norm());
    return best;
}

const std::vector<std::string> kBundledScenes = {
    "two_points.json", "triangle.json", "square.json", "circle.json", "disk.json",
    "pentagon.json",   "lshape.json",   "balls.json",  "cloud2d.json", "cloud3d.json"};

// ---------------------------------------------------------------------------

void criterion_1_oracle_equivalence() {
    bool pass = true;
    std::ostringstream detail;
    double worst_cells = 0.0, worst_coverage = 1.0, worst_seconds = 0.0;
    for (int scene_idx = 0; scene_idx < 10; ++scene_idx) {
        SplitMix64 rng(101 + static_cast<std::uint64_t>(scene_idx));
        const int m = 10 + static_cast<int>(rng.next() % 11);
        std::vector<Vec> sites;
        for (int i = 0; i < m; ++i) sites.push_back(v2(rng.uniform01(), rng.uniform01()));
        ClosedSetModel model({std::make_shared<PointCloudShape>(sites)});
        Box bbox{v2(-0.5, -0.5), v2(1.5, 1.5)};

        const auto start = std::chrono::steady_clock::now();
        auto res = extract_mk(model, grid_sampler(bbox, 256), 2);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        worst_seconds = std::max(worst_seconds, seconds);
        if (seconds >= 30.0) pass = false;

        auto oracle = voronoi_mk_oracle(sites, 2, bbox, res.spacing);
        const double cell = res.spacing;
        for (const auto& s : res.samples) {
            const double cells = nearest_distance(s.x, oracle) / cell;
            worst_cells = std::max(worst_cells, cells);
            if (cells > 2.0) pass = false;
        }
        long covered = 0;
        std::vector<Vec> sample_pts;
        for (const auto& s : res.samples) sample_pts.push_back(s.x);
        for (const Vec& o : oracle) {
            if (nearest_distance(o, sample_pts) <= 2.0 * cell) ++covered;
        }
        const double coverage = oracle.empty() ? 1.0
                                               : static_cast<double>(covered)
                                                     / static_cast<double>(oracle.size());
        worst_coverage = std::min(worst_coverage, coverage);
        if (coverage < 0.95) pass = false;

        g_clouds.push_back(Cloud{std::move(sites), std::move(res), bbox});
    }
    detail << "worst sample offset " << worst_cells << " cells, worst coverage "
           << 100.0 * worst_coverage << "%, worst runtime " << worst_seconds << " s";
    record(1, "oracle equivalence", pass, detail.str());
}

void criterion_2_dimension_bound() {
    bool pass = true;
    std::ostringstream detail;

    double lo2 = 10.0, hi2 = 0.0;
    for (const auto& cloud : g_clouds) {
        std::vector<Vec> pts;
        for (const auto& s : cloud.res2.samples) pts.push_back(s.x);
        const auto policy = DimensionScalePolicy::for_run(cloud.res2.spacing, cloud.bbox);
        auto est = estimate_dimension(pts, policy);
        if (!est) {
            pass = false;
            continue;
        }
        lo2 = std::min(lo2, est->value);
        hi2 = std::max(hi2, est->value);
        if (est->value < 0.8 || est->value > 1.25) pass = false;
    }
    detail << "2d M_2 in [" << lo2 << ", " << hi2 << "]";

    // 12-site cloud in R^3, k = 2, 2e5 random samples
    Scene s3 = load_scene(scene_path("cloud3d.json"));
    auto sampler3 = scene_sampler(s3);
    auto res3 = extract_mk(s3.model, sampler3, 2);
    std::vector<Vec> pts3;
    for (const auto& s : res3.samples) pts3.push_back(s.x);
    double dim3 = 0.0;
    if (pts3.size() >= 10) {
        auto est = box_dimension(pts3, res3.spacing, 16.0 * res3.spacing, 8);
        dim3 = est.value;
    }
    if (dim3 > 2.25) pass = false;
    detail << "; 3d M_2 " << dim3 << " (samples " << pts3.size() << ")";

    // k = 3 in the plane gives finite sets: estimate at sub-separation scales
    double worst3 = 0.0;
    for (const auto& cloud : g_clouds) {
        ClosedSetModel model({std::make_shared<PointCloudShape>(cloud.sites)});
        auto resk3 = extract_mk(model, grid_sampler(cloud.bbox, 256), 3);
        std::vector<Vec> pts;
        for (const auto& s : resk3.samples) pts.push_back(s.x);
        double value = 0.0;  // degenerate (tiny) sets count as dimension 0
        if (pts.size() >= 10) {
            const double h = resk3.spacing;
            value = box_dimension(pts, h / 64.0, h / 4.0, 6).value;
        }
        worst3 = std::max(worst3, value);
        if (value > 0.1) pass = false;
    }
    detail << "; worst planar M_3 " << worst3;
    record(2, "dimension bound", pass, detail.str());
}

void criterion_3_countability() {
    bool pass = true;
    std::ostringstream detail;
    long total_m3 = 0;
    double worst_match = 0.0;
    for (const auto& name : kBundledScenes) {
        Scene scene = load_scene(scene_path(name));
        if (scene.model.dim() != 2) continue;
        auto sampler = scene_sampler(scene);
        auto res = extract_mk(scene.model, sampler, 3, scene_tau(name, sampler));
        total_m3 += static_cast<long>(res.samples.size());

        // expected M_3 set and cardinality cap per scene
        std::vector<Vec> expected;
        long cap = 0;
        const auto& member = scene.model.members().front();
        if (auto* cloud = dynamic_cast<const PointCloudShape*>(member.get())) {
            auto sites = cloud->points();
            cap = static_cast<long>(sites.size()) * static_cast<long>(sites.size())
                  * static_cast<long>(sites.size());
            expected = voronoi_mk_oracle(sites, 3, sampler.bbox, res.spacing);
        } else if (auto* circ = dynamic_cast<const SphereShape*>(member.get())) {
            cap = 16L * 16L * 16L;  // net triples all share one circumcenter
            expected = {circ->center()};
        } else {
            cap = 0;  // convex shapes, two-candidate curves: no M_3 at all
        }
        if (static_cast<long>(res.samples.size()) > std::max(cap, 0L)) pass = false;
        for (const auto& s : res.samples) {
            const double match = nearest_distance(s.x, expected);
            worst_match = std::max(worst_match, match);
            if (match > 1e-4) pass = false;
        }
    }
    detail << total_m3 << " M_3 samples across planar scenes, worst circumcenter match "
           << worst_match;
    record(3, "countable M_3 collapse", pass, detail.str());
}

void criterion_4_convexity() {
    bool pass = true;
    std::ostringstream detail;
    for (const auto& name : {std::string("disk.json"), std::string("pentagon.json")}) {
        Scene scene = load_scene(scene_path(name));
        auto res = extract_mk(scene.model, scene_sampler(scene), 2);
        detail << name << ": " << res.samples.size() << " samples  ";
        if (!res.samples.empty()) pass = false;
    }
    record(4, "convex scenes are empty", pass, detail.str());
}

void criterion_5_separation_constant() {
    bool pass = true;
    std::ostringstream detail;

    SplitMix64 rng(0xc5);
    double min_c = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next() % 3);
        const int k = 2 + static_cast<int>(rng.next() % n);
        std::vector<Vec> dirs;
        do {
            dirs.clear();
            for (int i = 0; i < k; ++i) dirs.push_back(rng.unit_vector(n));
        } while (!is_generic(dirs, 1e-3));
        const double c = separation_constant(Configuration::from_directions(dirs));
        min_c = std::min(min_c, c);
        if (!(c > 1e-8)) pass = false;
    }
    detail << "min random c " << min_c;

    // equilateral reference against the dense angular oracle
    std::vector<Vec> eq;
    for (int j = 0; j < 3; ++j) {
        eq.push_back(v2(std::cos(2.0 * M_PI * j / 3.0), std::sin(2.0 * M_PI * j / 3.0)));
    }
    auto eq_cfg = Configuration::from_directions(eq);
    const double c_eq = separation_constant(eq_cfg);
    double oracle = std::numeric_limits<double>::infinity();
    const int grid = 1000000;
    for (int g = 0; g < grid; ++g) {
        const double th = 2.0 * M_PI * g / grid;
        double hi = -2.0, lo = 2.0;
        for (const Vec& a : eq_cfg.dirs()) {
            const double d = std::cos(th) * a[0] + std::sin(th) * a[1];
            hi = std::max(hi, d);
            lo = std::min(lo, d);
        }
        oracle = std::min(oracle, hi - lo);
    }
    oracle *= 0.5;
    if (std::abs(c_eq - 0.75) > 1e-6 || std::abs(c_eq - oracle) > 1e-6) pass = false;
    detail << "; equilateral " << c_eq << " vs oracle " << oracle;

    auto ortho = Configuration::from_directions({v2(1, 0), v2(0, 1)});
    const double c_ortho = separation_constant(ortho);
    if (std::abs(c_ortho - std::sqrt(2.0) / 2.0) > 1e-6) pass = false;
    detail << "; orthonormal pair " << c_ortho;
    record(5, "separation constant", pass, detail.str());
}

void criterion_6_separation_check() {
    bool pass = true;
    SplitMix64 rng(0xc6);
    long checked = 0;
    double min_margin = std::numeric_limits<double>::infinity();
    while (checked < 10000) {
        const int n = 2 + static_cast<int>(rng.next() % 3);
        const int k = 2 + static_cast<int>(rng.next() % n);
        std::vector<Vec> dirs;
        do {
            dirs.clear();
            for (int i = 0; i < k; ++i) dirs.push_back(rng.unit_vector(n));
        } while (!is_generic(dirs, 1e-3));
        auto a = Configuration::from_directions(dirs);
        Frame frame = build_frame(a);
        const double c = separation_constant(a);
        for (int probe = 0; probe < 20 && checked < 10000; ++probe, ++checked) {
            const double ratio_q = frame.dim_q() > 0 ? rng.uniform(0.0, 0.2499) : 0.0;
            Vec v = std::sqrt(1.0 - ratio_q * ratio_q)
                    * Vec(frame.basis_p * rng.unit_vector(frame.dim_p()));
            if (frame.dim_q() > 0) {
                v += ratio_q * Vec(frame.basis_q * rng.unit_vector(frame.dim_q()));
            }
            v *= rng.uniform(0.05, 5.0);
            auto res = separation_check(v, a, frame, c);
            min_margin = std::min(min_margin, res.gap - c);
            if (!(res.gap > c)) pass = false;
        }
    }
    std::ostringstream detail;
    detail << checked << " cone directions, min gap margin " << min_margin;
    record(6, "cosine gap exceeds c", pass, detail.str());
}

struct AuditedChart {
    std::string scene;
    int k;
    double lipschitz;
    double bound;
};

std::vector<AuditedChart> g_audited;

void criterion_7_cone_avoidance() {
    bool pass = true;
    long charts_audited = 0, violations = 0;
    for (const auto& name : kBundledScenes) {
        Scene scene = load_scene(scene_path(name));
        auto sampler = scene_sampler(scene);
        const int n = scene.model.dim();
        for (int k = 2; k <= n + 1; ++k) {
            auto res = extract_mk(scene.model, sampler, k, scene_tau(name, sampler));
            std::vector<std::vector<MedialSample>> clusters(res.charts.size());
            for (const auto& s : res.samples) {
                clusters[static_cast<std::size_t>(s.chart_id)].push_back(s);
            }
            for (std::size_t c = 0; c < res.charts.size(); ++c) {
                const auto& cert = res.charts[c].cert;
                auto v = cone_avoidance_audit(clusters[c], cert);
                violations += static_cast<long>(v.size());
                ++charts_audited;

                Frame frame = build_frame(cert.a);
                auto fit = lipschitz_graph_fit(clusters[c], frame, cert.r, cert.t);
                if (!fit.injectivity.empty()) pass = false;
                g_audited.push_back(
                    {name, k, fit.L,
                     std::sqrt(1.0 - cert.r * cert.r) / cert.r});
            }
        }
    }
    if (violations != 0) pass = false;

    // planted fixture: displacement along P by t/2 must be caught, exactly
    Scene two = load_scene(scene_path("two_points.json"));
    auto res = extract_mk(two.model, scene_sampler(two), 2);
    bool planted_ok = false;
    for (std::size_t c = 0; c < res.charts.size(); ++c) {
        std::vector<MedialSample> cluster;
        for (const auto& s : res.samples) {
            if (s.chart_id == static_cast<int>(c)) cluster.push_back(s);
        }
        if (cluster.size() < 2) continue;
        const auto& cert = res.charts[c].cert;
        Frame frame = build_frame(cert.a);
        auto clean = cone_avoidance_audit(cluster, cert);
        MedialSample planted = cluster.front();
        planted.x = planted.x + 0.5 * cert.t * Vec(frame.basis_p.col(0));
        cluster.push_back(planted);
        auto flagged = cone_avoidance_audit(cluster, cert);
        planted_ok = clean.empty() && flagged.size() == 2;
        break;
    }
    if (!planted_ok) pass = false;

    std::ostringstream detail;
    detail << charts_audited << " charts audited, " << violations
           << " violations, planted fixture " << (planted_ok ? "caught" : "missed");
    record(7, "cone avoidance audit", pass, detail.str());
}

void criterion_8_lipschitz() {
    bool pass = true;
    double worst = 0.0;
    for (const auto& chart : g_audited) {
        worst = std::max(worst, chart.lipschitz);
        if (chart.lipschitz > chart.bound + 1e-12) pass = false;
    }
    // synthetic tilted graphs recover tan(theta)
    auto pair = Configuration::from_directions({v2(1, 0), v2(0, 1)});
    Frame frame = build_frame(pair);
    double worst_err = 0.0;
    for (double theta : {0.2, 0.7, 1.3}) {
        const double slope = std::tan(theta);
        std::vector<MedialSample> cluster;
        for (int j = 0; j < 8; ++j) {
            MedialSample s;
            s.x = 0.02 * j * Vec(frame.basis_q.col(0) + slope * frame.basis_p.col(0));
            cluster.push_back(std::move(s));
        }
        auto fit = lipschitz_graph_fit(cluster, frame, 0.25, 1.0);
        worst_err = std::max(worst_err, std::abs(fit.L - slope));
        if (std::abs(fit.L - slope) > 1e-6) pass = false;
    }
    std::ostringstream detail;
    detail << "max fitted L " << worst << " (bound " << std::sqrt(15.0)
           << "), tilted-graph error " << worst_err;
    record(8, "lipschitz graph bound", pass, detail.str());
}

void criterion_9_equidistance_rank() {
    bool pass = true;
    SplitMix64 rng(0xc9);
    long checked = 0;
    while (checked < 1000) {
        const int n = 2 + static_cast<int>(rng.next() % 3);
        const int k = 2 + static_cast<int>(rng.next() % n);
        std::vector<Vec> subset;
        for (int i = 0; i < k; ++i) subset.push_back(rng.gaussian_vector(n));
        if (!is_generic(subset, 1e-3)) continue;
        ++checked;
        auto flat = equidistance_flat(subset);
        if (flat.rank != k - 1 || flat.directions.cols() != n - k + 1) pass = false;
    }
    std::ostringstream detail;
    detail << checked << " generic subsets, rank always k-1";
    record(9, "equidistance flat rank", pass, detail.str());
}

void criterion_10_circle_scene() {
    bool pass = true;
    Scene scene = load_scene(scene_path("circle.json"));
    auto sampler = scene_sampler(scene);
    const double tau = scene_tau("circle.json", sampler);

    auto res = extract_mk(scene.model, sampler, 2, tau);
    std::ostringstream detail;
    if (res.samples.empty()) {
        pass = false;
        detail << "no M_2 samples";
    } else {
        Vec centroid = Vec::Zero(2);
        for (const auto& s : res.samples) centroid += s.x;
        centroid /= static_cast<double>(res.samples.size());
        const double offset = centroid.norm() / res.spacing;
        if (offset > 2.0) pass = false;
        detail << res.samples.size() << " M_2 samples, centroid offset " << offset << " cells";
    }

    auto report = stratification_report(scene.model, sampler, tau);
    long l0 = 0, l_other = 0;
    for (const auto& stratum : report.strata) {
        if (stratum.i == 0) {
            l0 += static_cast<long>(stratum.points.size());
        } else {
            l_other += static_cast<long>(stratum.points.size());
        }
    }
    if (l0 == 0 || l_other != 0) pass = false;
    detail << "; strata mass: L_0 " << l0 << ", others " << l_other;

    // the M_2 cluster is dimensionally trivial
    double m2_dim = 0.0;
    std::vector<Vec> pts;
    for (const auto& s : res.samples) pts.push_back(s.x);
    if (pts.size() >= 10) {
        m2_dim = box_dimension(pts, res.spacing / 64.0, res.spacing / 4.0, 6).value;
    }
    if (m2_dim > 0.1) pass = false;
    detail << "; M_2 dimension " << m2_dim;
    record(10, "circle degenerates to L_0", pass, detail.str());
}

void criterion_11_determinism() {
    bool pass = true;
    std::ostringstream detail;
    long scenes_checked = 0;
    for (const auto& name : kBundledScenes) {
        const fs::path dir1 = fs::temp_directory_path() / ("medax_acc_det1_" + name);
        const fs::path dir2 = fs::temp_directory_path() / ("medax_acc_det2_" + name);
        fs::remove_all(dir1);
        fs::remove_all(dir2);
        CommandOptions opts;
        opts.k = 2;
        Scene scene = load_scene(scene_path(name));
        opts.tau = scene_tau(name, scene_sampler(scene));
        if (cmd_extract(scene_path(name), dir1.string(), opts) != kExitOk) pass = false;
        if (cmd_extract(scene_path(name), dir2.string(), opts) != kExitOk) pass = false;
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        const std::string a = slurp(dir1 / "samples.csv");
        const std::string b = slurp(dir2 / "samples.csv");
        if (a.empty() || a != b) pass = false;
        ++scenes_checked;
        fs::remove_all(dir1);
        fs::remove_all(dir2);
    }
    detail << scenes_checked << " scenes, byte-identical samples.csv";
    record(11, "seeded determinism", pass, detail.str());
}

}  // namespace

int main() {
    std::printf("medax acceptance suite\n");
    criterion_1_oracle_equivalence();
    criterion_2_dimension_bound();
    criterion_3_countability();
    criterion_4_convexity();
    criterion_5_separation_constant();
    criterion_6_separation_check();
    criterion_7_cone_avoidance();
    criterion_8_lipschitz();
    criterion_9_equidistance_rank();
    criterion_10_circle_scene();
    criterion_11_determinism();

    int failures = 0;
    for (const auto& r : g_results) {
        if (!r.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(g_results.size()) - failures,
                g_results.size());
    return failures;
}
