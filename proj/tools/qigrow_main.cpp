#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qig/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "qigrow - growth-function extraction, continuity-condition "
        "checking, autonomous approximation and comparison solves for "
        "quasi-isotropic integrands"};

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string stage;
    bool list = false;

    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--out", out_dir, "output directory override");
    auto* seed_opt = app.add_option("--seed", seed, "sampling seed");
    app.add_option("--threads", threads, "OpenMP thread count");
    app.add_option("--stage", stage,
                   "run a single stage: conditions | certificate | "
                   "approx_verify | solve | comparison");
    app.add_flag("--list-models", list, "print the model registry");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    if (list) {
        std::cout << qig::registry_listing();
        return 0;
    }
    if (config_path.empty()) {
        std::cerr << "error: --config is required (or --list-models)\n";
        return 2;
    }

    qig::Json j;
    {
        std::ifstream is(config_path);
        if (!is) {
            std::cerr << "error: cannot open config " << config_path << "\n";
            return 2;
        }
        try {
            is >> j;
        } catch (const std::exception& e) {
            std::cerr << "error: config parse: " << e.what() << "\n";
            return 2;
        }
    }

    qig::ExperimentConfig cfg;
    try {
        cfg = qig::parse_config(j);
    } catch (const qig::ValidationError& e) {
        std::cerr << "error: config validation: " << e.what() << "\n";
        return 2;
    }
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) {
        cfg.seed = seed;
        cfg.grid.seed = seed;
    }
    if (threads > 0) cfg.threads = threads;
    if (!stage.empty()) cfg.pipeline = stage;

    const int rc = qig::run_pipeline(cfg);
    if (rc == 0)
        std::cout << "ok: pipeline '" << cfg.pipeline << "' -> "
                  << cfg.out_dir << "\n";
    else
        std::cerr << "stage failure: see " << cfg.out_dir << " reports\n";
    return rc;
}
