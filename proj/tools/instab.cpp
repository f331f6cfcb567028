#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "instab/dominating.hpp"
#include "instab/experiment.hpp"
#include "instab/models/registry.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int workers, std::optional<std::uint64_t> seed,
            bool emit_trajectories) {
    instab::ExperimentConfig cfg;
    try {
        cfg = instab::parse_config_file(config_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    if (seed) cfg.engine.seed = *seed;  // recorded in the manifest

    instab::RunOptions options;
    options.workers = workers;
    if (emit_trajectories) options.trajectory_dir = out_dir;

    try {
        std::filesystem::create_directories(out_dir);
        const auto result = instab::run_replications(cfg, options);
        instab::emit_outputs(cfg, result, out_dir);
        long failed = 0;
        for (const auto& rec : result.summary) failed += rec.n_failed;
        for (const auto& rec : result.summary) {
            std::cout << rec.sweep_label << ": " << rec.n_unstable << '/'
                      << rec.replications << " declared unstable\n";
        }
        if (failed > 0) {
            std::cerr << failed << " replication(s) failed\n";
            return 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

int cmd_quantiles(const std::string& config_path, long k_max,
                  const std::string& out_path, int workers) {
    instab::ExperimentConfig cfg;
    try {
        cfg = instab::parse_config_file(config_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    try {
        const auto model =
            instab::models::make_model(cfg.model_id, cfg.model_overrides);
        const double w0 = model->f(model->initial_state());
        const bool double_inc =
            cfg.engine.algorithm == instab::Algorithm::local;
        auto table = instab::QuantileCache::instance().get(
            cfg.dom, w0, double_inc, cfg.n_reps, k_max, workers);
        std::vector<double> q(table->begin(),
                              table->begin() + (k_max + 1));
        if (out_path.empty()) {
            instab::write_quantiles_csv(std::cout, q);
        } else {
            std::ofstream os(out_path);
            if (!os) {
                std::cerr << "error: cannot write " << out_path << '\n';
                return 3;
            }
            instab::write_quantiles_csv(os, q);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo instability detection for parameterized Markov "
                 "chains"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    int workers = 1;
    std::optional<std::uint64_t> seed;
    bool emit_trajectories = false;

    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Path to the JSON config")
        ->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--workers", workers, "Worker threads");
    std::uint64_t seed_value = 0;
    auto* seed_opt = run->add_option("--seed", seed_value, "Root seed override");
    run->add_flag("--emit-trajectories", emit_trajectories,
                  "Write per-replication trajectory CSVs");

    long k_max = 0;
    std::string q_out;
    auto* quant = app.add_subcommand(
        "quantiles", "Emit the dominating-process quantile table");
    quant->add_option("config", config_path, "Path to the JSON config")
        ->required();
    quant->add_option("--k-max", k_max, "Table length (rows k = 0..K)")
        ->required();
    quant->add_option("--out", q_out, "Output file (default stdout)");
    quant->add_option("--workers", workers, "Worker threads");

    auto* models = app.add_subcommand("models", "List available models");

    CLI11_PARSE(app, argc, argv);

    if (*models) {
        for (const auto& id : instab::models::model_ids()) {
            std::cout << id << '\n';
        }
        return 0;
    }
    if (*quant) {
        if (k_max < 0) {
            std::cerr << "config: --k-max must be >= 0\n";
            return 2;
        }
        return cmd_quantiles(config_path, k_max, q_out, workers);
    }
    if (seed_opt->count() > 0) seed = seed_value;
    return cmd_run(config_path, out_dir, workers, seed, emit_trajectories);
}
