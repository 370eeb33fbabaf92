// Dual jump-PDE process: clock, jump laws, trajectory mechanics, replay.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "shelab/dual.hpp"
#include "shelab/harness.hpp"
#include "shelab/mc.hpp"
#include "shelab/shapes.hpp"

using namespace shelab;

namespace {

ModelParams level_params(double n) {
    ModelParams p;
    p.n = n;
    return p;
}

}  // namespace

TEST_CASE("clock waiting times are Exp(clock_rate)") {
    const ModelParams p = level_params(10.0);
    const long draws = 20000;
    std::vector<double> w(static_cast<std::size_t>(draws));
    RngStream rng(51, 0);
    for (auto& x : w) x = sample_waiting_time(rng, p);
    const MCSummary s = mean_and_se(w, 51);
    REQUIRE(std::fabs(s.estimate - 0.36728964426852651) < 3.0 * s.std_error);  // 1/clock_rate
    REQUIRE(*std::min_element(w.begin(), w.end()) > 0.0);
}

TEST_CASE("jump heights follow the (1/n)-floored pareto law") {
    const ModelParams p = level_params(10.0);
    const long draws = 30000;
    std::vector<double> h(static_cast<std::size_t>(draws));
    RngStream rng(52, 0);
    for (auto& x : h) x = sample_jump_height(rng, p);

    // support: every height is at least 1/n
    REQUIRE(*std::min_element(h.begin(), h.end()) >= 1.0 / p.n);

    // one frozen tail probability, binomial error bars
    const double p_tail = 0.43527528164806207;  // P(S > 0.2) = 2^{-alphabeta}
    long hits = 0;
    for (double x : h)
        if (x > 0.2) ++hits;
    const double se = std::sqrt(p_tail * (1.0 - p_tail) / draws);
    REQUIRE(std::fabs(static_cast<double>(hits) / draws - p_tail) < 4.0 * se);

    // full-law KS against F(s) = 1 - (ns)^{-alphabeta}
    std::sort(h.begin(), h.end());
    const double ab = p.alphabeta();
    double d_stat = 0.0;
    for (long i = 0; i < draws; ++i) {
        const double cdf = 1.0 - std::pow(p.n * h[static_cast<std::size_t>(i)], -ab);
        const double lo = static_cast<double>(i) / draws;
        const double hi = static_cast<double>(i + 1) / draws;
        d_stat = std::max({d_stat, cdf - lo, hi - cdf});
    }
    REQUIRE(ks_pvalue(d_stat, draws) > 0.01);
}

TEST_CASE("jump locations follow the alpha-power law") {
    GridSpec g(-1.0, 1.0, 40);
    Field z(g);
    z[10] = 1.0;
    z[20] = 2.0;
    const double alpha = 1.5;
    const double p20 = std::pow(2.0, alpha) / (1.0 + std::pow(2.0, alpha));

    const long draws = 20000;
    long at20 = 0;
    RngStream rng(53, 0);
    for (long i = 0; i < draws; ++i) {
        const int cell = sample_jump_location_cell(rng, z, alpha);
        REQUIRE((cell == 10 || cell == 20));
        if (cell == 20) ++at20;
    }
    const double expected = p20 * draws;
    const double chi2 = (at20 - expected) * (at20 - expected) / expected +
                        ((draws - at20) - (draws - expected)) *
                            ((draws - at20) - (draws - expected)) / (draws - expected);
    REQUIRE(chi2_pvalue_1dof(chi2) > 0.01);

    Field neg(g);
    neg[3] = -0.5;
    RngStream r2(53, 1);
    REQUIRE_THROWS_AS(sample_jump_location_cell(r2, neg, alpha), std::invalid_argument);
    Field zero(g);
    REQUIRE_THROWS_AS(sample_jump_location_cell(r2, zero, alpha), std::invalid_argument);
}

TEST_CASE("zero start field: extinct immediately, clock frozen") {
    ModelParams p = level_params(16.0);
    SemigroupPlan plan(p.grid);
    Field psi(p.grid);
    RngStream rng(54, 0);
    const DualTrajectory traj = simulate_dual_path(plan, psi, 0.1, p, rng);
    REQUIRE(traj.extinct);
    REQUIRE_FALSE(traj.stopped);
    REQUIRE(traj.jumps.empty());
    REQUIRE(traj.tau_final == 0.0);
    REQUIRE(traj.t_final == 0.1);
    REQUIRE(integrate(traj.final_field) == 0.0);
}

TEST_CASE("sub-threshold mass is treated as extinct") {
    ModelParams p = level_params(16.0);
    SemigroupPlan plan(p.grid);
    Field psi(p.grid);
    psi[200] = 1e-13 / p.grid.dx();  // total mass 1e-13 < 1e-12
    RngStream rng(55, 0);
    const DualTrajectory traj = simulate_dual_path(plan, psi, 0.05, p, rng);
    REQUIRE(traj.extinct);
    REQUIRE(traj.jumps.empty());
    REQUIRE(traj.tau_final == 0.0);
    // Heat flow conserves the mass; the sink still acts on the remainder and
    // bites O(1e-8) relative at this amplitude.
    REQUIRE(integrate(traj.final_field) == Catch::Approx(1e-13).epsilon(1e-6));
}

TEST_CASE("internal budget stops the trajectory") {
    // n close to 1 makes the budget ln n tiny while a heavy start field makes
    // tau grow fast, so the budget is hit long before t_end.
    ModelParams p = level_params(1.05);
    SemigroupPlan plan(p.grid);
    const Field psi = GaussianBump{0.0, 0.5, 10.0}.field(p.grid);
    RngStream rng(56, 0);
    const DualTrajectory traj = simulate_dual_path(plan, psi, 0.5, p, rng);
    REQUIRE(traj.stopped);
    REQUIRE(traj.t_final < 0.5);
    REQUIRE_FALSE(traj.extinct);
    // tau lands on the budget up to one step of the trapezoid interpolant
    REQUIRE(std::fabs(traj.tau_final - p.clock_budget()) <= p.dt * traj.max_norm_pow);
}

TEST_CASE("trajectory jumps carry consistent bookkeeping") {
    // Heavy start field at a fine level so the clock fires many times.
    ModelParams p = level_params(64.0);
    SemigroupPlan plan(p.grid);
    const Field psi = GaussianBump{0.0, 1.5, 6.0}.field(p.grid);
    RngStream rng(57, 2);
    const DualTrajectory traj = simulate_dual_path(plan, psi, 0.25, p, rng);
    REQUIRE_FALSE(traj.extinct);
    REQUIRE(traj.jumps.size() >= 3);  // verified for this seed

    double prev_t = 0.0, prev_target = 0.0;
    for (const auto& j : traj.jumps) {
        REQUIRE(j.t_real >= prev_t);
        REQUIRE(j.clock_target > prev_target);
        REQUIRE(j.height >= 1.0 / p.n);
        REQUIRE((j.cell >= 0 && j.cell < p.grid.cells));
        REQUIRE(j.location == p.grid.center(j.cell));
        // tau at the jump re-integrates to the clock target up to one step
        REQUIRE(std::fabs(j.tau_at_jump - j.clock_target) <= p.dt * traj.max_norm_pow);
        prev_t = j.t_real;
        prev_target = j.clock_target;
    }
    REQUIRE(traj.t_final == 0.25);
    REQUIRE(traj.pde_steps > 0);
}

TEST_CASE("recorded segments replay bitwise through solve_segment") {
    ModelParams p = level_params(64.0);
    SemigroupPlan plan(p.grid);
    const Field psi = GaussianBump{0.0, 1.5, 6.0}.field(p.grid);
    RngStream rng(57, 2);  // same setup as above: >= 3 jumps, no extinction
    const DualTrajectory traj = simulate_dual_path(plan, psi, 0.25, p, rng, true);
    REQUIRE(traj.segments.size() == traj.jumps.size() + 1);

    Field v = psi;
    double tau_replayed = 0.0;
    const double dx = p.grid.dx();
    for (std::size_t k = 0; k < traj.segments.size(); ++k) {
        const DualSegmentRecord& rec = traj.segments[k];
        REQUIRE(rec.start.v == v.v);
        const PdeSegment seg =
            solve_segment(plan, rec.start, rec.duration, p.dt, p.sink(), p.alpha);
        REQUIRE(seg.end.v == rec.end.v);  // bitwise
        tau_replayed += seg.tau_increment();
        v = rec.end;
        if (k < traj.jumps.size()) v[traj.jumps[k].cell] += traj.jumps[k].height / dx;
    }
    REQUIRE(v.v == traj.final_field.v);
    REQUIRE(tau_replayed == traj.tau_final);

    double duration_sum = 0.0;
    for (const auto& rec : traj.segments) duration_sum += rec.duration;
    REQUIRE(duration_sum == Catch::Approx(traj.t_final).margin(1e-9));
}

TEST_CASE("dual trajectories are deterministic per stream") {
    // Heavy field so both streams see jumps and therefore actually diverge.
    ModelParams p = level_params(64.0);
    SemigroupPlan plan(p.grid);
    const Field psi = GaussianBump{0.0, 1.5, 6.0}.field(p.grid);

    RngStream r1(58, 4), r2(58, 4), r3(58, 5);
    const DualTrajectory a = simulate_dual_path(plan, psi, 0.1, p, r1);
    const DualTrajectory b = simulate_dual_path(plan, psi, 0.1, p, r2);
    const DualTrajectory c = simulate_dual_path(plan, psi, 0.1, p, r3);
    REQUIRE(a.jumps.size() == b.jumps.size());
    REQUIRE(a.final_field.v == b.final_field.v);
    REQUIRE(a.tau_final == b.tau_final);
    REQUIRE(a.final_field.v != c.final_field.v);
}

TEST_CASE("trajectory argument validation") {
    ModelParams p = level_params(16.0);
    SemigroupPlan plan(p.grid);
    RngStream rng(59, 0);
    Field neg(p.grid);
    neg[5] = -1.0;
    REQUIRE_THROWS_AS(simulate_dual_path(plan, neg, 0.1, p, rng), std::invalid_argument);
    const Field psi = GaussianBump{0.0, 1.5, 1.0}.field(p.grid);
    REQUIRE_THROWS_AS(simulate_dual_path(plan, psi, -0.1, p, rng), std::invalid_argument);
    Field wrong(GridSpec(-1.0, 1.0, 8));
    REQUIRE_THROWS_AS(simulate_dual_path(plan, wrong, 0.1, p, rng), std::invalid_argument);
}

TEST_CASE("dual pairing estimator") {
    ModelParams p = level_params(16.0);
    SemigroupPlan plan(p.grid);
    const Field psi = GaussianBump{0.0, 1.5, 1.0}.field(p.grid);
    const Field phi = GaussianBump{0.0, 1.0, 1.0}.field(p.grid);

    std::vector<DualTrajectory> trajs;
    for (int i = 0; i < 3; ++i) {
        RngStream rng(60, static_cast<std::uint64_t>(i));
        trajs.push_back(simulate_dual_path(plan, psi, 0.05, p, rng));
    }
    const MCSummary s = dual_exp_pairing_estimator(trajs, phi, 60);
    double manual = 0.0;
    for (const auto& t : trajs) manual += std::exp(-pairing(phi, t.final_field));
    manual /= 3.0;
    REQUIRE(s.estimate == Catch::Approx(manual).epsilon(1e-15));
    REQUIRE(s.replicas == 3);
}
