// medax: extract samples of the k-medial axis of a closed scene, certify the
// extracted charts (cone avoidance + Lipschitz bound), estimate box-counting
// dimensions, and produce stratification reports.

#include "medax/commands.hpp"

#include <CLI11.hpp>

#include <string>

int main(int argc, char** argv) {
    CLI::App app{"k-medial axis extraction and certification"};
    app.require_subcommand(1);

    medax::CommandOptions opts;
    std::string scene;
    std::string out_dir = ".";
    std::string run_dir;

    auto add_sampling_flags = [&](CLI::App* cmd) {
        cmd->add_option("--grid", opts.grid, "grid resolution per axis");
        cmd->add_option("--random", opts.random_count, "number of random sample points");
        auto* seed_opt = cmd->add_option("--seed", opts.seed, "sampler seed");
        seed_opt->each([&](const std::string&) { opts.seed_set = true; });
        cmd->add_option("--tau", opts.tau, "distance slack (default 2 * grid spacing)");
        cmd->add_option("--sigma-tol", opts.sigma_tol, "relative rank threshold");
    };

    auto* extract = app.add_subcommand("extract", "sample the k-medial axis of a scene");
    extract->add_option("--scene", scene, "scene JSON file")->required();
    extract->add_option("--k", opts.k, "medial-axis level (k nearest points in generic position)");
    extract->add_option("--out", out_dir, "output directory")->required();
    add_sampling_flags(extract);

    auto* certify = app.add_subcommand("certify", "audit the charts of an extract run");
    certify->add_option("run_dir", run_dir, "directory written by extract")->required();

    auto* dim = app.add_subcommand("dim", "box-counting dimension of an extract run");
    dim->add_option("run_dir", run_dir, "directory written by extract")->required();

    auto* report = app.add_subcommand("report", "stratification report for a scene");
    report->add_option("--scene", scene, "scene JSON file")->required();
    report->add_option("--out", out_dir, "output directory")->required();
    add_sampling_flags(report);

    CLI11_PARSE(app, argc, argv);

    if (extract->parsed()) return medax::cmd_extract(scene, out_dir, opts);
    if (certify->parsed()) return medax::cmd_certify(run_dir);
    if (dim->parsed()) return medax::cmd_dim(run_dir);
    if (report->parsed()) return medax::cmd_report(scene, out_dir, opts);
    return medax::kExitInternalError;
}
