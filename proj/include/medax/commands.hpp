#pragma once

#include "medax/analysis.hpp"
#include "medax/io.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

namespace medax {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit-code contract shared by every command: 0 success, 2 scene or run-dir
/// problem, 3 internal error, 4 certification failure.
enum ExitCode : int {
    kExitOk = 0,
    kExitSceneError = 2,
    kExitInternalError = 3,
    kExitViolations = 4,
};

struct CommandOptions {
    int k = 2;
    int grid = 0;           // 0 = take from scene / default
    long random_count = 0;  // 0 = grid sampling
    std::uint64_t seed = 0;
    bool seed_set = false;
    double tau = 0.0;  // 0 = 2 * spacing
    double sigma_tol = kDefaultSigmaTol;
};

/// Record of one command run: inputs, parameters, outputs; every listed
/// output exists when the command exits 0.
struct RunManifest {
    std::string scene_path;
    std::string command;
    int k = 0;
    double tau = 0.0;
    double sigma_tol = kDefaultSigmaTol;
    int grid = 0;
    long random_count = 0;
    std::uint64_t seed = 0;
    double spacing = 0.0;
    Box bbox;
    std::string version = kToolVersion;
    std::vector<std::string> outputs;
    double duration_seconds = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["scene"] = scene_path;
        j["command"] = command;
        j["version"] = version;
        nlohmann::json params;
        params["k"] = k;
        params["tau"] = tau;
        params["sigma_tol"] = sigma_tol;
        params["grid"] = grid;
        params["random"] = random_count;
        params["seed"] = seed;
        params["spacing"] = spacing;
        params["bbox"] = {std::vector<double>(bbox.lo.data(), bbox.lo.data() + bbox.lo.size()),
                          std::vector<double>(bbox.hi.data(), bbox.hi.data() + bbox.hi.size())};
        j["parameters"] = params;
        j["outputs"] = outputs;
        j["duration_seconds"] = duration_seconds;
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.scene_path = j.at("scene").get<std::string>();
        m.command = j.at("command").get<std::string>();
        m.version = j.at("version").get<std::string>();
        const auto& p = j.at("parameters");
        m.k = p.at("k").get<int>();
        m.tau = p.at("tau").get<double>();
        m.sigma_tol = p.at("sigma_tol").get<double>();
        m.grid = p.at("grid").get<int>();
        m.random_count = p.at("random").get<long>();
        m.seed = p.at("seed").get<std::uint64_t>();
        m.spacing = p.at("spacing").get<double>();
        const auto lo = p.at("bbox")[0].get<std::vector<double>>();
        const auto hi = p.at("bbox")[1].get<std::vector<double>>();
        m.bbox.lo = Eigen::Map<const Vec>(lo.data(), static_cast<long>(lo.size()));
        m.bbox.hi = Eigen::Map<const Vec>(hi.data(), static_cast<long>(hi.size()));
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.duration_seconds = j.at("duration_seconds").get<double>();
        return m;
    }
};

namespace detail {

inline SamplerSpec make_sampler(const Scene& scene, const CommandOptions& opts) {
    SamplerSpec spec;
    spec.bbox = scene.bbox;
    long random = opts.random_count > 0 ? opts.random_count : scene.sampling.random_count;
    int grid = opts.grid > 0 ? opts.grid : scene.sampling.grid;
    if (opts.grid > 0) random = opts.random_count;  // explicit --grid wins over scene random
    if (random > 0) {
        spec.kind = SamplerSpec::Kind::Random;
        spec.count = random;
    } else {
        spec.kind = SamplerSpec::Kind::Grid;
        spec.grid_res = grid > 0 ? grid : 128;
    }
    spec.seed = opts.seed_set ? opts.seed : scene.sampling.seed;
    return spec;
}

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest.json");
    out << manifest.to_json().dump(2) << '\n';
}

struct ChartCluster {
    Certificate cert;
    std::vector<MedialSample> samples;
};

/// Rebuilds per-chart clusters from a run directory: chart configurations
/// from the sidecar, the chart distance from its first (founding) sample.
inline std::vector<ChartCluster> load_clusters(const std::filesystem::path& dir,
                                               double sigma_tol) {
    const auto rows = io::read_samples_csv((dir / "samples.csv").string());
    const auto charts = io::read_charts_csv((dir / "charts.csv").string());
    std::vector<ChartCluster> clusters(charts.size());
    for (const auto& row : rows) {
        if (row.chart_id < 0 || static_cast<std::size_t>(row.chart_id) >= charts.size()) {
            throw std::runtime_error("sample references an unknown chart");
        }
        auto& cluster = clusters[static_cast<std::size_t>(row.chart_id)];
        MedialSample s;
        s.x = row.x;
        s.d = row.d;
        s.k_max = row.k_max;
        s.residual = row.residual;
        s.chart_id = row.chart_id;
        cluster.samples.push_back(std::move(s));
    }
    for (std::size_t c = 0; c < charts.size(); ++c) {
        if (clusters[c].samples.empty()) continue;
        Configuration a = Configuration::from_directions(charts[c], sigma_tol);
        clusters[c].cert = make_certificate(a, clusters[c].samples.front().d, sigma_tol);
    }
    return clusters;
}

template <typename Fn>
inline int run_command(Fn&& fn) {
    try {
        return fn();
    } catch (const SceneError& e) {
        std::cerr << "scene error: " << e.what() << '\n';
        return kExitSceneError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternalError;
    }
}

}  // namespace detail

/// extract: sample the scene, write samples.csv + charts.csv + manifest.json.
inline int cmd_extract(const std::string& scene_path, const std::string& out_dir,
                       const CommandOptions& opts) {
    return detail::run_command([&]() {
        const auto start = std::chrono::steady_clock::now();
        Scene scene = load_scene(scene_path);
        SamplerSpec sampler = detail::make_sampler(scene, opts);
        ExtractionResult result = extract_mk(scene.model, sampler, opts.k, opts.tau,
                                             opts.sigma_tol);

        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);
        io::write_samples_csv((dir / "samples.csv").string(), result, scene.model.dim());
        io::write_charts_csv((dir / "charts.csv").string(), result.charts, scene.model.dim());

        RunManifest manifest;
        manifest.scene_path = std::filesystem::absolute(scene_path).string();
        manifest.command = "extract";
        manifest.k = opts.k;
        manifest.tau = result.tau;
        manifest.sigma_tol = opts.sigma_tol;
        manifest.grid = sampler.kind == SamplerSpec::Kind::Grid ? sampler.grid_res : 0;
        manifest.random_count = sampler.kind == SamplerSpec::Kind::Random ? sampler.count : 0;
        manifest.seed = sampler.seed;
        manifest.spacing = result.spacing;
        manifest.bbox = sampler.bbox;
        manifest.outputs = {"samples.csv", "charts.csv"};
        manifest.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        detail::write_manifest(dir, manifest);
        return kExitOk;
    });
}

/// certify: audit every chart of a run for cone avoidance and the
/// Lipschitz-graph bound; writes certificates.json and audit.json. Exit 0
/// only when no chart has violations and every fitted slope is within the
/// bound sqrt(1-r^2)/r.
inline int cmd_certify(const std::string& run_dir) {
    return detail::run_command([&]() {
        const std::filesystem::path dir(run_dir);
        if (!std::filesystem::exists(dir / "manifest.json")) {
            throw SceneError("run dir missing manifest.json: " + run_dir);
        }
        std::ifstream min(dir / "manifest.json");
        RunManifest manifest = RunManifest::from_json(nlohmann::json::parse(min));

        auto clusters = detail::load_clusters(dir, manifest.sigma_tol);

        nlohmann::json certs = nlohmann::json::array();
        nlohmann::json audit;
        audit["charts"] = nlohmann::json::array();
        long total_violations = 0;
        long total_injectivity = 0;
        double max_lipschitz = 0.0;
        bool lipschitz_ok = true;

        for (std::size_t c = 0; c < clusters.size(); ++c) {
            const auto& cluster = clusters[c];
            if (cluster.samples.empty()) continue;
            const auto violations = cone_avoidance_audit(cluster.samples, cluster.cert,
                                                         manifest.sigma_tol);
            const Frame frame = build_frame(cluster.cert.a, manifest.sigma_tol);
            const auto fit = lipschitz_graph_fit(cluster.samples, frame, cluster.cert.r,
                                                 cluster.cert.t);
            const double bound = std::sqrt(1.0 - cluster.cert.r * cluster.cert.r)
                                 / cluster.cert.r;

            nlohmann::json record = io::certificate_json(cluster.cert, violations);
            record["chart_id"] = c;
            certs.push_back(record);

            nlohmann::json entry;
            entry["chart_id"] = c;
            entry["n_samples"] = cluster.samples.size();
            entry["violations"] = record["violations"];
            entry["lipschitz"] = fit.L;
            entry["lipschitz_bound"] = bound;
            entry["witness"] = {fit.witness_i, fit.witness_j};
            entry["injectivity_violations"] = nlohmann::json::array();
            for (const auto& v : fit.injectivity) {
                entry["injectivity_violations"].push_back({{"i", v.i}, {"j", v.j}});
            }
            audit["charts"].push_back(entry);

            total_violations += static_cast<long>(violations.size());
            total_injectivity += static_cast<long>(fit.injectivity.size());
            max_lipschitz = std::max(max_lipschitz, fit.L);
            if (fit.L > bound + 1e-12) lipschitz_ok = false;
        }
        audit["total_violations"] = total_violations;
        audit["total_injectivity_violations"] = total_injectivity;
        audit["max_lipschitz"] = max_lipschitz;

        {
            std::ofstream out(dir / "certificates.json");
            out << certs.dump(2) << '\n';
        }
        {
            std::ofstream out(dir / "audit.json");
            out << audit.dump(2) << '\n';
        }
        if (total_violations > 0 || total_injectivity > 0 || !lipschitz_ok) {
            return static_cast<int>(kExitViolations);
        }
        return static_cast<int>(kExitOk);
    });
}

/// dim: box-counting estimate of the run's sample set with the default scale
/// policy (4 cells up to a quarter of the box diameter); writes dim.csv.
inline int cmd_dim(const std::string& run_dir) {
    return detail::run_command([&]() {
        const std::filesystem::path dir(run_dir);
        if (!std::filesystem::exists(dir / "manifest.json")) {
            throw SceneError("run dir missing manifest.json: " + run_dir);
        }
        std::ifstream min(dir / "manifest.json");
        RunManifest manifest = RunManifest::from_json(nlohmann::json::parse(min));
        const auto rows = io::read_samples_csv((dir / "samples.csv").string());

        std::vector<Vec> points;
        points.reserve(rows.size());
        for (const auto& row : rows) points.push_back(row.x);

        std::vector<std::pair<int, DimensionEstimate>> out_rows;
        const auto policy = DimensionScalePolicy::for_run(manifest.spacing, manifest.bbox);
        if (auto est = estimate_dimension(points, policy)) {
            out_rows.emplace_back(manifest.k, *est);
        } else {
            DimensionEstimate degenerate;
            degenerate.n_points = static_cast<long>(points.size());
            out_rows.emplace_back(manifest.k, degenerate);
        }
        io::write_dim_csv((dir / "dim.csv").string(), out_rows);
        return kExitOk;
    });
}

/// report: full stratification of a scene across k = 2..n+1, with strata
/// counts, per-stratum dimension estimates, and for planar scenes an SVG
/// overlay of the closed set and the extracted strata.
inline int cmd_report(const std::string& scene_path, const std::string& out_dir,
                      const CommandOptions& opts) {
    return detail::run_command([&]() {
        const auto start = std::chrono::steady_clock::now();
        Scene scene = load_scene(scene_path);
        SamplerSpec sampler = detail::make_sampler(scene, opts);
        StratumReport report = stratification_report(scene.model, sampler, opts.tau,
                                                     opts.sigma_tol);

        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);

        nlohmann::json j;
        j["scene"] = std::filesystem::absolute(scene_path).string();
        j["dim"] = scene.model.dim();
        j["spacing"] = report.spacing;
        j["levels"] = nlohmann::json::array();
        for (const auto& level : report.levels) {
            nlohmann::json entry;
            entry["k"] = level.k;
            entry["sample_count"] = level.sample_count;
            entry["chart_count"] = level.chart_count;
            entry["dimension"] =
                level.dimension ? io::dimension_json(*level.dimension) : nlohmann::json();
            j["levels"].push_back(entry);
        }
        j["strata"] = nlohmann::json::array();
        for (const auto& stratum : report.strata) {
            nlohmann::json entry;
            entry["i"] = stratum.i;
            entry["k_level"] = stratum.k_level;
            entry["count"] = stratum.points.size();
            entry["dimension"] =
                stratum.dimension ? io::dimension_json(*stratum.dimension) : nlohmann::json();
            j["strata"].push_back(entry);
        }
        {
            std::ofstream out(dir / "report.json");
            out << j.dump(2) << '\n';
        }
        std::vector<std::string> outputs = {"report.json"};
        if (scene.model.dim() == 2) {
            io::write_report_svg((dir / "report.svg").string(), scene.model, sampler.bbox,
                                 report);
            outputs.push_back("report.svg");
        }

        RunManifest manifest;
        manifest.scene_path = std::filesystem::absolute(scene_path).string();
        manifest.command = "report";
        manifest.k = 0;
        manifest.tau = opts.tau;
        manifest.sigma_tol = opts.sigma_tol;
        manifest.grid = sampler.kind == SamplerSpec::Kind::Grid ? sampler.grid_res : 0;
        manifest.random_count = sampler.kind == SamplerSpec::Kind::Random ? sampler.count : 0;
        manifest.seed = sampler.seed;
        manifest.spacing = report.spacing;
        manifest.bbox = sampler.bbox;
        manifest.outputs = outputs;
        manifest.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        detail::write_manifest(dir, manifest);
        return kExitOk;
    });
}

}  // namespace medax
