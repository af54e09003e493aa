#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sscl/harness.hpp"
#include "sscl/io.hpp"

namespace {

using sscl::ExperimentConfig;
using sscl::RunRecord;

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_override) {
    ExperimentConfig cfg = sscl::load_config(config_path);
    if (seed) cfg.seeds = {*seed};
    if (!out_override.empty()) cfg.out_dir = out_override;
    const auto records = sscl::run_seeds(cfg);
    sscl::emit_report(cfg, records, cfg.out_dir);
    for (const auto& r : records) {
        std::printf("seed %llu: ACC=%.4f BWT=%.4f FWT=%.4f (%.1fs)\n",
                    static_cast<unsigned long long>(r.seed), r.acc, r.bwt, r.fwt, r.wall_sec);
    }
    std::printf("report written to %s\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_csv, const std::string& out_override) {
    ExperimentConfig cfg = sscl::load_config(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    std::vector<std::string> values;
    std::stringstream ss(values_csv);
    std::string v;
    while (std::getline(ss, v, ',')) {
        if (!v.empty()) values.push_back(v);
    }
    const auto report = sscl::run_sweep(cfg, axis, values);
    sscl::emit_sweep_report(cfg, report, cfg.out_dir);
    for (const auto& p : report.points) {
        if (p.failed)
            std::printf("%s=%s: FAILED (%s)\n", axis.c_str(), p.label.c_str(), p.error.c_str());
        else
            std::printf("%s=%s: mean ACC=%.4f (std %.4f) over %zu runs\n", axis.c_str(),
                        p.label.c_str(), p.mean_acc, p.std_acc, p.runs.size());
    }
    std::printf("sweep report written to %s\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_analyze(const std::string& trace_path) {
    std::cout << sscl::analyze_trace(trace_path).dump(2) << "\n";
    return 0;
}

int cmd_gen_data(int classes, int dim, int per_class, std::uint64_t seed, double radius,
                 const std::string& out) {
    const sscl::Dataset ds = sscl::make_synthetic_dataset(classes, dim, per_class, seed, radius);
    sscl::save_dataset(ds, out);
    std::printf("wrote %zu samples (%d classes, dim %d) to %s\n", ds.xs.size(), classes, dim,
                out.c_str());
    return 0;
}

int cmd_report(const std::string& in_dir) {
    std::ifstream f(in_dir + "/summary.json");
    if (!f) throw std::invalid_argument("report: no summary.json in " + in_dir);
    const nlohmann::json summary = nlohmann::json::parse(f);
    std::printf("%-10s %8s %8s %8s\n", "seed", "ACC%", "BWT%", "FWT%");
    for (const auto& r : summary.at("runs")) {
        std::printf("%-10llu %8.2f %8.2f %8.2f\n",
                    static_cast<unsigned long long>(r.at("seed").get<std::uint64_t>()),
                    100.0 * r.at("acc").get<double>(), 100.0 * r.at("bwt").get<double>(),
                    100.0 * r.at("fwt").get<double>());
    }
    const auto& agg = summary.at("aggregate");
    std::printf("%-10s %8.2f %8.2f %8.2f  (ACC std %.2f)\n", "mean",
                100.0 * agg.at("mean_acc").get<double>(),
                100.0 * agg.at("mean_bwt").get<double>(),
                100.0 * agg.at("mean_fwt").get<double>(),
                100.0 * agg.at("std_acc").get<double>());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-supervised continual learning experiment harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir, axis, values, trace_path, in_dir, data_out = "dataset.sscl";
    std::optional<std::uint64_t> seed;
    int classes = 10, dim = 16, per_class = 50;
    double radius = 4.0;
    std::uint64_t gen_seed = 0;

    auto* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("--config", config_path, "config JSON path")->required();
    run->add_option("--seed", seed, "override: run only this seed");
    run->add_option("--out", out_dir, "override output directory");

    auto* sweep = app.add_subcommand("sweep", "ablation sweep over one hyperparameter");
    sweep->add_option("--config", config_path, "config JSON path")->required();
    sweep->add_option("--axis", axis, "p | alpha | lambda | arch | batch")->required();
    sweep->add_option("--values", values, "comma-separated values (arch: 64x16,128x32)")
        ->required();
    sweep->add_option("--out", out_dir, "override output directory");

    auto* analyze = app.add_subcommand("analyze", "diagnostics over a step trace");
    analyze->add_option("--trace", trace_path, "trace.jsonl path")->required();

    auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset container");
    gen->add_option("--classes", classes, "number of classes");
    gen->add_option("--dim", dim, "feature dimension");
    gen->add_option("--per-class", per_class, "samples per class");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--radius", radius, "class-mean radius");
    gen->add_option("--out", data_out, "output path");

    auto* report = app.add_subcommand("report", "print metrics from a run directory");
    report->add_option("--in", in_dir, "run output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << e.what() << "\n" << app.help();
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, seed, out_dir);
        if (sweep->parsed()) return cmd_sweep(config_path, axis, values, out_dir);
        if (analyze->parsed()) return cmd_analyze(trace_path);
        if (gen->parsed()) return cmd_gen_data(classes, dim, per_class, gen_seed, radius, data_out);
        if (report->parsed()) return cmd_report(in_dir);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
