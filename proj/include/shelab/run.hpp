#pragma once

// Experiment dispatch and artifact emission.  `execute_experiment` maps a
// validated config to a report (CSV text + JSON results + one verdict line
// per assertion); `run` adds the filesystem side: out/<experiment>.csv and
// out/<experiment>.manifest.json, verdict lines to the log stream, exit
// status 0 iff every assertion passed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "shelab/config.hpp"
#include "shelab/harness.hpp"
#include "shelab/output.hpp"

namespace shelab {

struct RunOutput {
    bool pass = false;
    std::string csv;
    json results;
    std::vector<std::string> lines;
};

inline int effective_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace detail {

inline std::string verdict(bool pass, const std::string& text) {
    return std::string(pass ? "[PASS] " : "[FAIL] ") + text;
}

inline void check_lines(RunOutput& out, const std::string& prefix,
                        const std::vector<CheckLine>& checks) {
    for (const auto& c : checks) {
        std::ostringstream s;
        s << prefix << c.name << ": value=" << c.value << " threshold=" << c.threshold;
        if (!c.detail.empty()) s << " (" << c.detail << ")";
        out.lines.push_back(verdict(c.pass, s.str()));
    }
}

}  // namespace detail

inline RunOutput execute_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const int workers = effective_workers(cfg.workers);
    RunOutput out;

    if (cfg.experiment == "noise-check") {
        const NoiseCheckReport r = run_noise_check(cfg.model, cfg.lambdas, cfg.replicas,
                                                   cfg.noise_t, cfg.noise_area, cfg.seed,
                                                   workers);
        for (const auto& row : r.rows) {
            std::ostringstream s;
            s << "noise-check lambda=" << row.lambda << ": |empirical-target|="
              << std::fabs(row.empirical - row.target)
              << " budget(3*se+bias)=" << 3.0 * row.se + row.bias_bound;
            out.lines.push_back(detail::verdict(row.pass, s.str()));
        }
        out.pass = r.pass;
        out.csv = to_csv(r);
        out.results = r;
    } else if (cfg.experiment == "she-mean") {
        const MeanFieldReport r = run_she_mean(cfg.model, cfg.phi, cfg.times, cfg.replicas,
                                               cfg.mean_allowance, cfg.seed, workers);
        for (const auto& row : r.rows) {
            std::ostringstream s;
            s << "she-mean t=" << row.time << ": sup|mean-P_t(phi)|=" << row.sup_abs_dev
              << " cells beyond 3*se+" << cfg.mean_allowance << ": " << row.violations;
            out.lines.push_back(detail::verdict(row.pass, s.str()));
        }
        {
            std::ostringstream s;
            s << "she-mean aborted replicas " << r.aborted << "/" << r.replicas
              << " (max 1%), max clamped-mass fraction " << r.max_clamp_fraction
              << " (max 0.01)";
            const bool ok = static_cast<double>(r.aborted) <=
                                0.01 * static_cast<double>(r.replicas) &&
                            r.max_clamp_fraction <= 0.01;
            out.lines.push_back(detail::verdict(ok, s.str()));
        }
        out.pass = r.pass;
        out.csv = to_csv(r);
        out.results = r;
    } else if (cfg.experiment == "pde-convergence") {
        const PdeConvergenceReport r = run_pde_convergence(cfg.model, cfg.psi, cfg.seed);
        detail::check_lines(out, "pde-convergence ", r.checks);
        out.pass = r.pass;
        out.csv = to_csv(r);
        out.results = r;
    } else if (cfg.experiment == "sampler-check") {
        const SamplerCheckReport r =
            run_sampler_check(cfg.model, cfg.psi, cfg.draws, cfg.trajectories,
                              cfg.sampler_t, cfg.seed, workers);
        detail::check_lines(out, "sampler-check ", r.checks);
        out.pass = r.pass;
        out.csv = to_csv(r);
        out.results = r;
    } else if (cfg.experiment == "duality-gap") {
        const GapExperimentReport r =
            run_gap_experiment(cfg.model, cfg.phi, cfg.psi, cfg.n_list, cfg.replicas,
                               cfg.gap_t, cfg.gap_allowance, cfg.seed, workers);
        for (const auto& row : r.rows) {
            std::ostringstream s;
            s << "duality-gap n=" << row.n << ": gap=" << row.gap
              << " budget(3*se+" << cfg.gap_allowance << ")="
              << 3.0 * row.combined_se + cfg.gap_allowance
              << " theory_scale=" << row.theory_scale;
            out.lines.push_back(detail::verdict(row.pass, s.str()));
        }
        {
            std::ostringstream s;
            s << "duality-gap monotone decrease within combined CIs across n";
            out.lines.push_back(detail::verdict(r.monotone_within_ci, s.str()));
        }
        {
            std::ostringstream s;
            s << "duality-gap Y-side aborted replicas " << r.y_aborted << "/"
              << cfg.replicas << " (max 1%)";
            const bool ok = static_cast<double>(r.y_aborted) <=
                            0.01 * static_cast<double>(cfg.replicas);
            out.lines.push_back(detail::verdict(ok, s.str()));
        }
        out.pass = r.pass;
        out.csv = to_csv(r);
        out.results = r;
    } else if (cfg.experiment == "moments-martingale") {
        const MomentMartingaleReport r = run_moment_martingale(
            cfg.model, cfg.phi, cfg.psi, cfg.times, cfg.q, cfg.replicas, cfg.seed, workers);
        for (const auto& row : r.rows) {
            std::ostringstream s;
            s << "moments-martingale t=" << row.time << ": residual |z|=" << row.zscore
              << " (max 3), max_x mean Y^q=" << row.qmoment_max
              << " envelope=" << row.envelope;
            out.lines.push_back(detail::verdict(row.pass, s.str()));
        }
        {
            std::ostringstream s;
            s << "moments-martingale t=0 q-moment matches phi^q exactly: err="
              << r.t0_qmoment_error;
            out.lines.push_back(detail::verdict(r.t0_qmoment_error <= 1e-12, s.str()));
        }
        {
            std::ostringstream s;
            s << "moments-martingale aborted replicas " << r.aborted << "/" << r.replicas
              << " (max 1%)";
            const bool ok = static_cast<double>(r.aborted) <=
                            0.01 * static_cast<double>(r.replicas);
            out.lines.push_back(detail::verdict(ok, s.str()));
        }
        out.pass = r.pass;
        out.csv = to_csv(r);
        out.results = r;
    } else if (cfg.experiment == "gronwall") {
        const GronwallReport r =
            run_gronwall_suite(cfg.gammas, cfg.cs, cfg.gronwall_T, cfg.gronwall_points);
        for (const auto& row : r.rows) {
            std::ostringstream s;
            s << "gronwall gamma=" << row.gamma << " c=" << row.c
              << ": min log margin over grid=" << row.min_log_margin
              << " (depth k=" << row.depth << ", min -1e-9)";
            out.lines.push_back(detail::verdict(row.pass, s.str()));
        }
        out.pass = r.pass;
        out.csv = to_csv(r);
        out.results = r;
    } else {
        throw ConfigError("experiment: unknown experiment '" + cfg.experiment + "'");
    }
    return out;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << text;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

inline int run(const ExperimentConfig& cfg, std::ostream& log) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunOutput out = execute_experiment(cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    write_text_file(dir / (cfg.experiment + ".csv"), out.csv);
    const json manifest = make_manifest(cfg, out.results, out.pass, wall);
    write_text_file(dir / (cfg.experiment + ".manifest.json"), manifest.dump(2) + "\n");

    for (const auto& line : out.lines) log << line << '\n';
    log << (out.pass ? "RESULT: PASS" : "RESULT: FAIL") << " (" << cfg.experiment
        << ", seed " << cfg.seed << ")\n";
    return out.pass ? 0 : 1;
}

}  // namespace shelab
