#pragma once

// Monte Carlo experiment runners.  Each runner wires simulators, samplers and
// oracles into one verdict: a report with per-row values, thresholds and
// pass flags.  Tolerances are pinned here, not configurable, so a passing
// report means the same thing everywhere.
//
// RNG stream layout inside one experiment (seed fixed): the Y side of the
// gap experiment uses streams [0, R), the dual side of the j-th level n_j
// uses [R·(1+j), R·(2+j)) — disjoint by construction, and the Y replicas are
// shared across all n (the Y-side summary is literally the same object).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "shelab/dual.hpp"
#include "shelab/dual_pde.hpp"
#include "shelab/gfunction.hpp"
#include "shelab/grid.hpp"
#include "shelab/gronwall.hpp"
#include "shelab/heat.hpp"
#include "shelab/levy.hpp"
#include "shelab/mc.hpp"
#include "shelab/params.hpp"
#include "shelab/rng.hpp"
#include "shelab/shapes.hpp"
#include "shelab/she.hpp"

namespace shelab {

// One named assertion: pass iff value <= threshold (or as documented by name).
struct CheckLine {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string detail;
};

inline CheckLine check_le(std::string name, double value, double threshold,
                          std::string detail = {}) {
    return {std::move(name), value, threshold, value <= threshold, std::move(detail)};
}

inline CheckLine check_ge(std::string name, double value, double threshold,
                          std::string detail = {}) {
    return {std::move(name), value, threshold, value >= threshold, std::move(detail)};
}

inline bool all_pass(const std::vector<CheckLine>& checks) {
    return std::all_of(checks.begin(), checks.end(),
                       [](const CheckLine& c) { return c.pass; });
}

// Kolmogorov-Smirnov p-value (asymptotic series with the usual finite-N
// effective sample-size correction).
inline double ks_pvalue(double d_stat, long n) {
    const double rn = std::sqrt(static_cast<double>(n));
    const double lam = (rn + 0.12 + 0.11 / rn) * d_stat;
    // Below λ≈0.2 the alternating series needs thousands of terms while the
    // p-value is 1 to within 5e-13, so short-circuit.
    if (lam < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                            std::exp(-2.0 * k * k * lam * lam);
        sum += term;
        if (std::fabs(term) < 1e-14) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

// Chi-square upper tail for 1 degree of freedom.
inline double chi2_pvalue_1dof(double chi2) { return std::erfc(std::sqrt(0.5 * chi2)); }

// ---------------------------------------------------------------------------
// Noise law: empirical Laplace functional of the thinned compensated noise
// against exp(+λ^α t|A|), with the small-jump truncation bias budgeted.
// ---------------------------------------------------------------------------

struct NoiseCheckRow {
    double lambda = 0.0;
    double empirical = 0.0;
    double target = 0.0;
    double se = 0.0;
    double bias_bound = 0.0;
    bool pass = false;
};

struct NoiseCheckReport {
    std::vector<NoiseCheckRow> rows;
    long replicas = 0;
    bool pass = false;
};

inline NoiseCheckReport run_noise_check(const ModelParams& p,
                                        std::span<const double> lambdas, long replicas,
                                        double t, double area, std::uint64_t seed,
                                        int workers) {
    p.validate();
    const LevyMeasure levy(p.alpha);
    const double volume = t * area;
    // One replica = one noise increment, shared across all λ.
    auto values = parallel_map<double>(replicas, workers, [&](long i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        return sample_noise_increment(rng, volume, p.eps_jump, levy);
    });

    NoiseCheckReport report;
    report.replicas = replicas;
    report.pass = true;
    for (double lambda : lambdas) {
        std::vector<double> transformed(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            transformed[i] = std::exp(-lambda * values[i]);
        const MCSummary s = mean_and_se(transformed, seed);
        NoiseCheckRow row;
        row.lambda = lambda;
        row.empirical = s.estimate;
        row.se = s.std_error;
        row.target = laplace_functional_target(lambda, t, area, p.alpha);
        row.bias_bound = laplace_truncation_bias_bound(lambda, t, area, p.eps_jump, levy);
        row.pass = std::fabs(row.empirical - row.target) <= 3.0 * row.se + row.bias_bound;
        report.pass = report.pass && row.pass;
        report.rows.push_back(row);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Mean-field identity: the replica-mean of Y_t against P_t φ, cell-wise.
// ---------------------------------------------------------------------------

struct MeanFieldRow {
    double time = 0.0;
    double sup_abs_dev = 0.0;   // max_i |mean_i - (P_t φ)_i|
    double max_se = 0.0;        // max_i SE_i
    double worst_x = 0.0;       // cell center of the largest deviation
    long violations = 0;        // cells with |dev| > 3·SE + allowance
    bool pass = false;
};

struct MeanFieldReport {
    std::vector<MeanFieldRow> rows;
    long replicas = 0;
    long aborted = 0;
    double max_clamp_fraction = 0.0;  // max over steps of clamped mass / current mass
    bool pass = false;
};

namespace detail {

struct YReplicaSnapshot {
    std::vector<std::vector<double>> fields;  // per time, raw cell values
    bool aborted = false;
    double max_clamp_fraction = 0.0;
};

inline YReplicaSnapshot y_replica_snapshots(const Field& phi, const ModelParams& p,
                                            std::span<const double> times,
                                            std::uint64_t seed, long stream) {
    RngStream rng(seed, static_cast<std::uint64_t>(stream));
    SemigroupPlan& plan = worker_plan(phi.grid);
    PathSample path = simulate_y_path(plan, phi, p, times, rng);
    YReplicaSnapshot snap;
    snap.aborted = path.aborted;
    if (!path.aborted) {
        for (const Field& f : path.fields) snap.fields.push_back(f.v);
        double mass = integrate(phi);
        for (double c : path.clamp_log) {
            if (mass > 0.0) snap.max_clamp_fraction = std::max(snap.max_clamp_fraction, c / mass);
        }
    }
    return snap;
}

}  // namespace detail

inline MeanFieldReport run_she_mean(const ModelParams& p, const GaussianBump& phi,
                                    std::span<const double> times, long replicas,
                                    double allowance, std::uint64_t seed, int workers) {
    p.validate();
    const Field phi_field = phi.field(p.grid);
    auto snaps = parallel_map<detail::YReplicaSnapshot>(replicas, workers, [&](long i) {
        return detail::y_replica_snapshots(phi_field, p, times, seed, i);
    });

    MeanFieldReport report;
    report.replicas = replicas;
    const int cells = p.grid.cells;
    SemigroupPlan plan(p.grid);
    for (const auto& s : snaps) {
        if (s.aborted) ++report.aborted;
        report.max_clamp_fraction = std::max(report.max_clamp_fraction, s.max_clamp_fraction);
    }

    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        std::vector<double> sum(static_cast<std::size_t>(cells), 0.0);
        std::vector<double> sumsq(static_cast<std::size_t>(cells), 0.0);
        long used = 0;
        for (const auto& s : snaps) {
            if (s.aborted) continue;
            ++used;
            const auto& f = s.fields[ti];
            for (int i = 0; i < cells; ++i) {
                sum[static_cast<std::size_t>(i)] += f[static_cast<std::size_t>(i)];
                sumsq[static_cast<std::size_t>(i)] +=
                    f[static_cast<std::size_t>(i)] * f[static_cast<std::size_t>(i)];
            }
        }
        const Field target = plan.apply(phi_field, times[ti]);
        MeanFieldRow row;
        row.time = times[ti];
        const double nn = static_cast<double>(used);
        for (int i = 0; i < cells; ++i) {
            const double mean = sum[static_cast<std::size_t>(i)] / nn;
            const double var =
                std::max(0.0, (sumsq[static_cast<std::size_t>(i)] - nn * mean * mean) /
                                  (nn - 1.0));
            const double se = std::sqrt(var / nn);
            const double dev = std::fabs(mean - target[i]);
            if (dev > row.sup_abs_dev) {
                row.sup_abs_dev = dev;
                row.worst_x = p.grid.center(i);
            }
            row.max_se = std::max(row.max_se, se);
            if (dev > 3.0 * se + allowance) ++row.violations;
        }
        row.pass = row.violations == 0;
        report.rows.push_back(row);
    }

    const bool aborts_ok =
        static_cast<double>(report.aborted) <= 0.01 * static_cast<double>(replicas);
    const bool clamp_ok = report.max_clamp_fraction <= 0.01;
    report.pass = aborts_ok && clamp_ok &&
                  std::all_of(report.rows.begin(), report.rows.end(),
                              [](const MeanFieldRow& r) { return r.pass; });
    return report;
}

// ---------------------------------------------------------------------------
// Deterministic PDE solver checks: heat-only degeneration, reaction substep
// against a brute-force RK4 oracle, Strang self-convergence order, and
// comparison/positivity on random ordered pairs.
// ---------------------------------------------------------------------------

struct PdeConvergenceReport {
    std::vector<CheckLine> checks;
    bool pass = false;
};

namespace detail {

// RK4 on v' = -c v^α with `substeps` internal steps, cell-wise.
inline Field reaction_rk4_oracle(const Field& v, double c, double dt, double alpha,
                                 int substeps) {
    Field out = v;
    const double h = dt / substeps;
    auto f = [&](double x) { return x > 0.0 ? -c * std::pow(x, alpha) : 0.0; };
    for (auto& x : out.v) {
        for (int s = 0; s < substeps; ++s) {
            const double k1 = f(x);
            const double k2 = f(x + 0.5 * h * k1);
            const double k3 = f(x + 0.5 * h * k2);
            const double k4 = f(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (x < 0.0) x = 0.0;
        }
    }
    return out;
}

// A nonnegative random test field: a few random Gaussian bumps.
inline Field random_bump_field(const GridSpec& g, RngStream& rng, int bumps) {
    Field f(g);
    for (int b = 0; b < bumps; ++b) {
        GaussianBump bump;
        bump.center = g.left + (g.right - g.left) * rng.uniform01();
        bump.width = 0.3 + 1.2 * rng.uniform01();
        bump.mass = 0.2 + rng.uniform01();
        for (int i = 0; i < g.cells; ++i) f[i] += bump.value(g.center(i));
    }
    return f;
}

}  // namespace detail

inline PdeConvergenceReport run_pde_convergence(const ModelParams& p,
                                                const GaussianBump& psi,
                                                std::uint64_t seed) {
    p.validate();
    PdeConvergenceReport report;
    SemigroupPlan plan(p.grid);
    const Field psi_field = psi.field(p.grid);
    const double sink = p.sink();

    {  // sink = 0 degenerates to iterated heat steps, and one step to one apply
        const double t_total = 0.25;
        const double dt = p.dt;
        PdeSegment seg = solve_segment(plan, psi_field, t_total, dt, 0.0, p.alpha);
        Field ref = psi_field;
        const long steps = static_cast<long>(std::llround(t_total / dt));
        for (long s = 0; s < steps; ++s) ref = plan.apply(ref, dt);
        report.checks.push_back(check_le("heat-degeneration sup|segment - iterated P_dt|",
                                         sup_abs_diff(seg.end, ref), 1e-10));
        const Field one_step = pde_step(plan, psi_field, dt, 0.0, p.alpha);
        report.checks.push_back(check_le("single-step sup|pde_step(sink=0) - P_dt|",
                                         sup_abs_diff(one_step, plan.apply(psi_field, dt)),
                                         1e-10));
    }

    {  // exact reaction substep against RK4 with 1000 substeps
        Field v(p.grid);
        for (int i = 0; i < p.grid.cells; ++i)
            v[i] = 3.0 * static_cast<double>(i) / static_cast<double>(p.grid.cells - 1);
        const double c = 1.7, dt = 1e-3;
        const Field exact = reaction_substep(v, c, dt, p.alpha);
        const Field rk4 = detail::reaction_rk4_oracle(v, c, dt, p.alpha, 1000);
        report.checks.push_back(
            check_le("reaction sup|closed form - RK4 oracle|", sup_abs_diff(exact, rk4), 1e-8));
    }

    {  // Strang self-convergence order over dt, dt/2, dt/4.
       // Base step 0.025 keeps every kernel resolved (t/dx² >= 2.5), so the
       // sampled-kernel composition defect stays at machine precision and the
       // measured order isolates the splitting error.
        const double t_total = 0.25, dt0 = 0.025;
        auto solve = [&](double dt) {
            return solve_segment(plan, psi_field, t_total, dt, sink, p.alpha).end;
        };
        const Field a = solve(dt0), b = solve(0.5 * dt0), c = solve(0.25 * dt0);
        const double e1 = sup_abs_diff(a, b), e2 = sup_abs_diff(b, c);
        const double order = std::log2(e1 / e2);
        std::ostringstream detail;
        detail << "e(dt)=" << e1 << " e(dt/2)=" << e2;
        report.checks.push_back(
            check_ge("strang self-convergence order", order, 1.8, detail.str()));
    }

    {  // comparison principle + exact positivity on 100 random ordered pairs
        RngStream rng(seed, 0);
        double worst_order = 0.0, worst_neg = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Field lo = detail::random_bump_field(p.grid, rng, 2);
            Field hi = lo;
            const Field extra = detail::random_bump_field(p.grid, rng, 2);
            for (int i = 0; i < p.grid.cells; ++i) hi[i] += extra[i];
            const double dt = 0.0125, t_total = 0.1;
            const Field lo_t = solve_segment(plan, lo, t_total, dt, sink, p.alpha).end;
            const Field hi_t = solve_segment(plan, hi, t_total, dt, sink, p.alpha).end;
            for (int i = 0; i < p.grid.cells; ++i) {
                worst_order = std::max(worst_order, lo_t[i] - hi_t[i]);
                worst_neg = std::min(worst_neg, std::min(lo_t[i], hi_t[i]));
            }
        }
        report.checks.push_back(
            check_le("comparison max(lower - upper) over 100 pairs", worst_order, 1e-10));
        report.checks.push_back(
            check_ge("positivity min cell over 100 pairs", worst_neg, 0.0));
    }

    report.pass = all_pass(report.checks);
    return report;
}

// ---------------------------------------------------------------------------
// Dual sampler laws and the time-change inverse-pair identity.
// ---------------------------------------------------------------------------

struct SamplerCheckReport {
    std::vector<CheckLine> checks;
    bool pass = false;
};

inline SamplerCheckReport run_sampler_check(const ModelParams& p, const GaussianBump& psi,
                                            long draws, long trajectories, double t_end,
                                            std::uint64_t seed, int workers) {
    p.validate();
    SamplerCheckReport report;
    const double ab = p.alphabeta();

    {  // jump heights: support bound and KS against 1 - (n·b)^{-αβ}
        RngStream rng(seed, 1);
        std::vector<double> s(static_cast<std::size_t>(draws));
        for (auto& x : s) x = sample_jump_height(rng, p);
        double min_height = s[0];
        for (double x : s) min_height = std::min(min_height, x);
        report.checks.push_back(
            check_ge("jump-height support min·n", min_height * p.n, 1.0));
        std::sort(s.begin(), s.end());
        double d_stat = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double cdf = 1.0 - std::pow(p.n * s[i], -ab);
            const double hi = static_cast<double>(i + 1) / static_cast<double>(s.size());
            const double lo = static_cast<double>(i) / static_cast<double>(s.size());
            d_stat = std::max(d_stat, std::max(std::fabs(cdf - lo), std::fabs(hi - cdf)));
        }
        report.checks.push_back(
            check_ge("jump-height KS p-value", ks_pvalue(d_stat, draws), 0.01));
    }

    {  // waiting times: empirical mean within 3 SE of Γ(2-αβ)/(n^{αβ}(αβ-1))
        RngStream rng(seed, 2);
        std::vector<double> w(static_cast<std::size_t>(draws));
        for (auto& x : w) x = sample_waiting_time(rng, p);
        const MCSummary s = mean_and_se(w, seed);
        const double target = 1.0 / p.clock_rate();
        report.checks.push_back(check_le("waiting-time |mean - target|",
                                         std::fabs(s.estimate - target),
                                         3.0 * s.std_error));
    }

    {  // two-cell location law: P(cell 2) = 2^α/(1 + 2^α), chi-square 1 dof
        Field z(p.grid);
        z[10] = 1.0;
        z[20] = 2.0;
        RngStream rng(seed, 3);
        long hits = 0;
        for (long i = 0; i < draws; ++i)
            if (sample_jump_location_cell(rng, z, p.alpha) == 20) ++hits;
        const double prob = std::pow(2.0, p.alpha) / (1.0 + std::pow(2.0, p.alpha));
        const double expect = prob * static_cast<double>(draws);
        const double expect_other = static_cast<double>(draws) - expect;
        const double observed_other = static_cast<double>(draws - hits);
        const double chi2 =
            (hits - expect) * (hits - expect) / expect +
            (observed_other - expect_other) * (observed_other - expect_other) / expect_other;
        report.checks.push_back(
            check_ge("two-cell location chi-square p-value", chi2_pvalue_1dof(chi2), 0.01));
    }

    {  // time change: |τ(γ(T_k)) - T_k| <= dt · max_r ‖Z_r‖_α^α per jump
        const Field psi_field = psi.field(p.grid);
        auto worst = parallel_map<double>(trajectories, workers, [&](long i) {
            RngStream rng(seed, 1000 + static_cast<std::uint64_t>(i));
            SemigroupPlan& plan = worker_plan(p.grid);
            const DualTrajectory traj = simulate_dual_path(plan, psi_field, t_end, p, rng);
            const double tol = p.dt * std::max(traj.max_norm_pow, 1e-300);
            double worst_ratio = 0.0;
            for (const auto& j : traj.jumps)
                worst_ratio =
                    std::max(worst_ratio, std::fabs(j.tau_at_jump - j.clock_target) / tol);
            if (traj.stopped)
                worst_ratio = std::max(
                    worst_ratio, std::fabs(traj.tau_final - p.clock_budget()) / tol);
            return worst_ratio;
        });
        double worst_ratio = 0.0;
        long total_jumps = 0;
        for (double r : worst) worst_ratio = std::max(worst_ratio, r);
        (void)total_jumps;
        std::ostringstream detail;
        detail << trajectories << " trajectories at n=" << p.n;
        report.checks.push_back(check_le("time-change |tau(gamma(T_k)) - T_k| / (dt·max norm)",
                                         worst_ratio, 1.0, detail.str()));
    }

    report.pass = all_pass(report.checks);
    return report;
}

// ---------------------------------------------------------------------------
// The duality-gap experiment: E e^{-⟨Y_t, ψ⟩} from the forward simulation
// against E e^{-⟨φ, Z_Υ⟩} from the dual, per level n, with shared Y replicas.
// ---------------------------------------------------------------------------

struct GapRow {
    double n = 0.0;
    double y_estimate = 0.0, y_se = 0.0;
    double z_estimate = 0.0, z_se = 0.0;
    double gap = 0.0, combined_se = 0.0, theory_scale = 0.0;
    bool pass = false;
};

struct GapExperimentReport {
    std::vector<GapRow> rows;
    MCSummary y_summary;
    long y_aborted = 0;
    bool monotone_within_ci = false;
    bool pass = false;
};

inline GapExperimentReport run_gap_experiment(const ModelParams& p, const GaussianBump& phi,
                                              const GaussianBump& psi,
                                              std::span<const double> n_list, long replicas,
                                              double t, double gap_allowance,
                                              std::uint64_t seed, int workers) {
    p.validate();
    const Field phi_field = phi.field(p.grid);
    const Field psi_field = psi.field(p.grid);
    const std::vector<double> times{t};

    struct YOutcome {
        double value = 0.0;
        bool aborted = false;
    };
    auto y_outcomes = parallel_map<YOutcome>(replicas, workers, [&](long i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        SemigroupPlan& plan = worker_plan(p.grid);
        PathSample path = simulate_y_path(plan, phi_field, p, times, rng);
        YOutcome out;
        out.aborted = path.aborted;
        if (!path.aborted) out.value = std::exp(-pairing(path.fields.back(), psi_field));
        return out;
    });
    std::vector<double> y_values;
    long y_aborted = 0;
    for (const auto& o : y_outcomes) {
        if (o.aborted)
            ++y_aborted;
        else
            y_values.push_back(o.value);
    }
    const MCSummary y_summary = mean_and_se(y_values, seed, y_aborted);

    GapExperimentReport report;
    report.y_summary = y_summary;
    report.y_aborted = y_aborted;

    for (std::size_t j = 0; j < n_list.size(); ++j) {
        const ModelParams pn = p.with_n(n_list[j]);
        const std::uint64_t base =
            static_cast<std::uint64_t>(replicas) * (1 + static_cast<std::uint64_t>(j));
        auto z_values = parallel_map<double>(replicas, workers, [&](long i) {
            RngStream rng(seed, base + static_cast<std::uint64_t>(i));
            SemigroupPlan& plan = worker_plan(p.grid);
            const DualTrajectory traj = simulate_dual_path(plan, psi_field, t, pn, rng);
            return std::exp(-pairing(phi_field, traj.final_field));
        });
        const MCSummary z_summary = mean_and_se(z_values, seed);

        GapRow row;
        row.n = n_list[j];
        row.y_estimate = y_summary.estimate;
        row.y_se = y_summary.std_error;
        row.z_estimate = z_summary.estimate;
        row.z_se = z_summary.std_error;
        row.gap = std::fabs(row.y_estimate - row.z_estimate);
        row.combined_se = std::sqrt(row.y_se * row.y_se + row.z_se * row.z_se);
        row.theory_scale = theory_gap_scale(row.n, p.alpha, p.beta);
        row.pass = row.gap <= 3.0 * row.combined_se + gap_allowance;
        report.rows.push_back(row);
    }

    report.monotone_within_ci = true;
    for (std::size_t j = 1; j < report.rows.size(); ++j) {
        const auto& prev = report.rows[j - 1];
        const auto& cur = report.rows[j];
        if (cur.gap > prev.gap + 3.0 * (prev.combined_se + cur.combined_se))
            report.monotone_within_ci = false;
    }
    const bool aborts_ok =
        static_cast<double>(y_aborted) <= 0.01 * static_cast<double>(replicas);
    report.pass = aborts_ok && report.monotone_within_ci &&
                  std::all_of(report.rows.begin(), report.rows.end(),
                              [](const GapRow& r) { return r.pass; });
    return report;
}

// ---------------------------------------------------------------------------
// Laplace-martingale residual and the q-th moment envelope, shared replicas.
// ---------------------------------------------------------------------------

struct MartingaleRow {
    double time = 0.0;
    double residual_mean = 0.0;
    double residual_se = 0.0;
    double zscore = 0.0;
    double qmoment_max = 0.0;  // max_x of the empirical E Y_t(x)^q
    double envelope = 0.0;     // C1·exp(C2·t)
    bool pass = false;
};

struct MomentMartingaleReport {
    std::vector<MartingaleRow> rows;
    double envelope_c1 = 0.0, envelope_c2 = 0.0;
    double t0_qmoment_error = 0.0;  // |max φ^q - empirical| at t = 0, exact 0
    long replicas = 0;
    long aborted = 0;
    bool pass = false;
};

inline MomentMartingaleReport run_moment_martingale(const ModelParams& p,
                                                    const GaussianBump& phi,
                                                    const GaussianBump& psi,
                                                    std::span<const double> times, double q,
                                                    long replicas, std::uint64_t seed,
                                                    int workers) {
    p.validate();
    if (!(q > 1.0 && q < p.alpha))
        throw std::invalid_argument("run_moment_martingale: need 1 < q < alpha");
    const Field phi_field = phi.field(p.grid);
    const MartingaleProbe probe =
        MartingaleProbe::from_fields(psi.field(p.grid), psi.laplacian_field(p.grid), p.alpha);

    std::vector<double> all_times{0.0};
    for (double t : times) all_times.push_back(t);

    struct Outcome {
        std::vector<double> residuals;            // per time
        std::vector<std::vector<double>> qpow;    // per time, per cell y^q
        bool aborted = false;
    };
    auto outcomes = parallel_map<Outcome>(replicas, workers, [&](long i) {
        RngStream rng(seed, static_cast<std::uint64_t>(i));
        SemigroupPlan& plan = worker_plan(p.grid);
        PathSample path = simulate_y_path(plan, phi_field, p, all_times, rng, &probe);
        Outcome out;
        out.aborted = path.aborted;
        if (path.aborted) return out;
        const double e0 = std::exp(-pairing(path.fields.front(), probe.psi));
        for (std::size_t k = 0; k < path.times.size(); ++k) {
            const double ek = std::exp(-pairing(path.fields[k], probe.psi));
            out.residuals.push_back(ek - e0 - path.drift_integral[k]);
            std::vector<double> qp(path.fields[k].v.size());
            for (std::size_t c = 0; c < qp.size(); ++c) {
                const double y = path.fields[k].v[c];
                qp[c] = y > 0.0 ? std::pow(y, q) : 0.0;
            }
            out.qpow.push_back(std::move(qp));
        }
        return out;
    });

    MomentMartingaleReport report;
    report.replicas = replicas;
    std::vector<std::vector<double>> residual_cols(all_times.size());
    std::vector<std::vector<double>> qsum(all_times.size(),
                                          std::vector<double>(static_cast<std::size_t>(p.grid.cells), 0.0));
    long used = 0;
    for (const auto& o : outcomes) {
        if (o.aborted) {
            ++report.aborted;
            continue;
        }
        ++used;
        for (std::size_t k = 0; k < all_times.size(); ++k) {
            residual_cols[k].push_back(o.residuals[k]);
            for (std::size_t c = 0; c < qsum[k].size(); ++c) qsum[k][c] += o.qpow[k][c];
        }
    }

    std::vector<double> qmax(all_times.size(), 0.0);
    for (std::size_t k = 0; k < all_times.size(); ++k) {
        for (double s : qsum[k])
            qmax[k] = std::max(qmax[k], s / static_cast<double>(used));
    }

    // Log-linear envelope over the positive-time points: C2 from a least
    // squares fit of ln qmax against t (clamped at 0), C1 lifted so the
    // envelope dominates every point.
    double c2 = 0.0;
    {
        double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
        const auto m = static_cast<double>(all_times.size() - 1);
        for (std::size_t k = 1; k < all_times.size(); ++k) {
            const double x = all_times[k], y = std::log(qmax[k]);
            st += x;
            sy += y;
            stt += x * x;
            sty += x * y;
        }
        const double denom = m * stt - st * st;
        if (denom > 0.0) c2 = std::max(0.0, (m * sty - st * sy) / denom);
    }
    double log_c1 = -1e300;
    for (std::size_t k = 0; k < all_times.size(); ++k)
        log_c1 = std::max(log_c1, std::log(qmax[k]) - c2 * all_times[k]);
    report.envelope_c1 = std::exp(log_c1);
    report.envelope_c2 = c2;

    double phi_qmax = 0.0;
    for (double x : phi_field.v) phi_qmax = std::max(phi_qmax, x > 0.0 ? std::pow(x, q) : 0.0);
    report.t0_qmoment_error = std::fabs(qmax[0] - phi_qmax);

    report.pass = true;
    for (std::size_t k = 0; k < all_times.size(); ++k) {
        const MCSummary s = mean_and_se(residual_cols[k], seed);
        MartingaleRow row;
        row.time = all_times[k];
        row.residual_mean = s.estimate;
        row.residual_se = s.std_error;
        row.zscore = s.std_error > 0.0 ? std::fabs(s.estimate) / s.std_error : 0.0;
        row.qmoment_max = qmax[k];
        row.envelope = report.envelope_c1 * std::exp(c2 * all_times[k]);
        row.pass = row.zscore <= 3.0 &&
                   row.qmoment_max <= row.envelope * (1.0 + 1e-12) &&
                   std::isfinite(row.qmoment_max);
        report.pass = report.pass && row.pass;
        report.rows.push_back(row);
    }
    const bool aborts_ok =
        static_cast<double>(report.aborted) <= 0.01 * static_cast<double>(replicas);
    // t=0 snapshot is phi itself; the only error is summation roundoff.
    report.pass = report.pass && aborts_ok && report.t0_qmoment_error <= 1e-12;
    return report;
}

// ---------------------------------------------------------------------------
// Gronwall suite: the constructed bound dominates the Picard extremal
// solution for every (γ, c) on the requested grid.
// ---------------------------------------------------------------------------

struct GronwallRow {
    double gamma = 0.0;
    double c = 0.0;
    int depth = 0;              // unrolling depth k
    double min_log_margin = 0.0;  // min over grid of log bound - log oracle
    bool pass = false;
};

struct GronwallReport {
    std::vector<GronwallRow> rows;
    bool pass = false;
};

inline GronwallReport run_gronwall_suite(std::span<const double> gammas,
                                         std::span<const double> cs, double T, int points,
                                         int oracle_refine = 20, int iterations = 50) {
    GronwallReport report;
    report.pass = true;
    const int nodes = points * oracle_refine;
    for (double gamma : gammas) {
        for (double c : cs) {
            const GronwallBound bound = gronwall_bound(c, gamma, T);
            const std::vector<double> oracle =
                picard_extremal_solution(c, gamma, T, nodes, iterations);
            GronwallRow row;
            row.gamma = gamma;
            row.c = c;
            row.depth = bound.k;
            row.min_log_margin = 1e300;
            for (int i = 0; i <= points; ++i) {
                const double t = T * static_cast<double>(i) / points;
                const double margin =
                    bound.log_bound(t) -
                    std::log(oracle[static_cast<std::size_t>(i * oracle_refine)]);
                row.min_log_margin = std::min(row.min_log_margin, margin);
            }
            row.pass = row.min_log_margin >= -1e-9;
            report.pass = report.pass && row.pass;
            report.rows.push_back(row);
        }
    }
    return report;
}

}  // namespace shelab
