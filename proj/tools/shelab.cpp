// Batch front door: JSON config in, CSV + manifest out, pass/fail lines on
// stdout.  Exit codes: 0 all assertions pass, 1 assertion failure, 2 config
// error, 3 runtime error.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "shelab/config.hpp"
#include "shelab/run.hpp"
#include "shelab/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo laboratory for a stochastic heat equation with "
                 "stable noise and its approximating dual"};
    app.set_version_flag("--version", std::string(shelab::version));

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    long replicas = 0;
    int workers = 0;
    app.add_option("--config", config_path,
                   "experiment config (JSON); a run manifest is also accepted")
        ->required();
    auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides config)");
    auto* replicas_opt =
        app.add_option("--replicas", replicas, "replica count (overrides config)");
    auto* workers_opt =
        app.add_option("--workers", workers, "worker threads; 0 = hardware (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        shelab::ExperimentConfig cfg = shelab::ExperimentConfig::load(config_path);
        if (out_opt->count() > 0) cfg.out = out_dir;
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (replicas_opt->count() > 0) cfg.replicas = replicas;
        if (workers_opt->count() > 0) cfg.workers = workers;
        cfg.validate();
        return shelab::run(cfg, std::cout);
    } catch (const shelab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return 3;
    }
}
