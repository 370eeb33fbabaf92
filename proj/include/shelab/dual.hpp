#pragma once

// The approximating dual process Z^(n): a jump-PDE hybrid run in real time t
// while its jump clock runs in internal time
//
//     τ(t) = ½ ∫₀^t ‖Z_r‖_α^α dr.
//
// Between jumps Z solves ∂v/∂t = ½Δv - sink·v^α (dual_pde.hpp).  Jumps fire
// when τ crosses the clock targets T_1 < T_2 < ... with independent
// Exp(clock_rate) spacings in internal time; jump k adds height
// S_k = (1/n)·u^{-1/(αβ)} (Pareto, tail P(S > b) = (nb)^{-αβ} for b ≥ 1/n)
// at a cell drawn from the normalized α-power law
// P(cell i) = z_i^α / Σ_j z_j^α, evaluated on the pre-jump field.
//
// The trajectory is stopped at Υ = min(t_end, γ(k_n)) where γ is the inverse
// of τ and k_n = ln n is the internal-time budget.  If the field mass falls
// below 1e-12 the process is extinct: τ freezes and no further jumps fire.
//
// Crossings are located inside a PDE step by bisecting the trapezoidal τ
// interpolant to relative tolerance 1e-10, then the segment is re-solved to
// the crossing duration, so every stored inter-jump segment is bitwise what
// solve_segment produces from its start field — and the recorded τ at a jump
// is re-integrated from the actual norm trace rather than snapped to the
// clock target, which is what the time-change acceptance check measures.
//
// Draw order per trajectory: T̃_1 up front; then at each jump height,
// location, next clock spacing.  Everything is deterministic given the
// replica's RngStream.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "shelab/dual_pde.hpp"
#include "shelab/grid.hpp"
#include "shelab/heat.hpp"
#include "shelab/mc.hpp"
#include "shelab/params.hpp"
#include "shelab/rng.hpp"

namespace shelab {

inline constexpr double extinction_mass = 1e-12;

// Exponential spacing of the internal-time jump clock.
inline double sample_waiting_time(RngStream& rng, const ModelParams& p) {
    return rng.exponential(p.clock_rate());
}

// Pareto jump height with inverse CDF (1/n)·u^{-1/(αβ)}.
inline double sample_jump_height(RngStream& rng, const ModelParams& p) {
    return (1.0 / p.n) * std::pow(rng.uniform01(), -1.0 / p.alphabeta());
}

// Cell index drawn with probability z_i^α / Σ_j z_j^α.
inline int sample_jump_location_cell(RngStream& rng, const Field& z, double alpha) {
    double total = 0.0;
    for (int i = 0; i < z.size(); ++i) {
        if (z[i] < 0.0)
            throw std::invalid_argument("sample_jump_location_cell: negative field");
        total += std::pow(z[i], alpha);
    }
    if (!(total > 0.0))
        throw std::invalid_argument("sample_jump_location_cell: field is identically zero");
    const double target = rng.uniform01() * total;
    double cum = 0.0;
    for (int i = 0; i < z.size(); ++i) {
        cum += std::pow(z[i], alpha);
        if (target <= cum) return i;
    }
    return z.size() - 1;  // target ~ total and rounding walked past the end
}

struct DualJump {
    double t_real = 0.0;       // γ(T_k): real time of the jump
    double clock_target = 0.0; // T_k
    double tau_at_jump = 0.0;  // τ re-integrated at γ(T_k); ≈ T_k
    double height = 0.0;       // S_k
    double location = 0.0;     // cell center
    int cell = 0;
};

struct DualSegmentRecord {
    Field start;
    double duration = 0.0;
    Field end;
};

struct DualTrajectory {
    std::vector<DualJump> jumps;
    Field final_field;
    double t_final = 0.0;
    double tau_final = 0.0;
    bool stopped = false;  // internal budget k_n hit before t_end
    bool extinct = false;
    double max_norm_pow = 0.0;  // max_r ‖Z_r‖_α^α along the path
    long pde_steps = 0;
    std::vector<DualSegmentRecord> segments;  // when record_segments
};

namespace detail {

// Scan forward from v on exactly the step schedule solve_segment would use
// for `horizon` (full dt steps, then one tail step), accumulating trapezoidal
// τ increments until they would exceed `need` or the horizon runs out.  On a
// crossing, bisect the per-step quadratic interpolant
//   q(θ) = (dur/2)·(N_b θ + (N_a - N_b) θ²/2),  θ ∈ [0,1],
// to relative tolerance 1e-10 and report the crossing duration d*.  With no
// crossing the scan IS the segment (same step sequence, same arithmetic), so
// it is returned assembled instead of being recomputed.
struct ScanResult {
    bool crossed = false;
    double d_star = 0.0;
    PdeSegment segment;  // valid when !crossed
};

inline ScanResult scan_for_crossing(SemigroupPlan& plan, const Field& v, double horizon,
                                    double need, double dt, double sink, double alpha) {
    ScanResult res;
    if (need <= 0.0) {  // clock already due
        res.crossed = true;
        res.d_star = 0.0;
        return res;
    }
    const long steps = static_cast<long>(std::floor(horizon / dt * (1.0 + 1e-12)));
    const double tail = horizon - static_cast<double>(steps) * dt;
    const bool has_tail = tail > dt * 1e-9;

    PdeSegment seg;
    seg.duration = horizon;
    Field w = v;
    double nb = lp_norm_pow(w, alpha);
    seg.norm_trace.emplace_back(0.0, nb);
    double acc = 0.0;
    const long total = steps + (has_tail ? 1 : 0);
    for (long s = 0; s < total; ++s) {
        const bool is_tail = s == steps;
        const double dur = is_tail ? tail : dt;
        w = pde_step(plan, w, dur, sink, alpha);
        const double na = lp_norm_pow(w, alpha);
        const double inc = 0.25 * dur * (nb + na);
        if (acc + inc > need) {
            const double q_target = need - acc;
            auto q = [&](double th) {
                return 0.5 * dur * (nb * th + 0.5 * (na - nb) * th * th);
            };
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 200 && (hi - lo) > 1e-10 * hi + 1e-14; ++it) {
                const double mid = 0.5 * (lo + hi);
                (q(mid) < q_target ? lo : hi) = mid;
            }
            double theta = 0.5 * (lo + hi);
            if (theta > 1.0 - 1e-9) theta = 1.0;
            res.crossed = true;
            res.d_star = static_cast<double>(s) * dt + theta * dur;
            return res;
        }
        acc += inc;
        nb = na;
        seg.norm_trace.emplace_back(is_tail ? horizon : static_cast<double>(s + 1) * dt, na);
    }
    seg.end = std::move(w);
    res.segment = std::move(seg);
    return res;
}

}  // namespace detail

inline DualTrajectory simulate_dual_path(SemigroupPlan& plan, const Field& psi,
                                         double t_end, const ModelParams& p,
                                         RngStream& rng, bool record_segments = false) {
    p.validate();
    if (!(psi.grid == plan.grid()))
        throw std::invalid_argument("simulate_dual_path: field grid mismatch");
    if (!(t_end >= 0.0)) throw std::invalid_argument("simulate_dual_path: need t_end >= 0");
    if (field_min(psi) < 0.0)
        throw std::invalid_argument("simulate_dual_path: psi must be nonnegative");

    const double sink = p.sink();
    const double budget = p.clock_budget();
    const double dx = psi.grid.dx();

    DualTrajectory traj;
    Field v = psi;
    double t = 0.0;
    double tau = 0.0;
    double next_clock = sample_waiting_time(rng, p);
    traj.extinct = integrate(v) < extinction_mass;
    traj.max_norm_pow = lp_norm_pow(v, p.alpha);

    auto book_segment = [&](const PdeSegment& seg) {
        traj.pde_steps += static_cast<long>(seg.norm_trace.size()) - 1;
        traj.max_norm_pow = std::max(traj.max_norm_pow, seg.max_norm_pow());
        if (record_segments) traj.segments.push_back({v, seg.duration, seg.end});
    };

    while (t < t_end - 1e-12 * std::max(1.0, t_end)) {
        if (traj.extinct) {
            // τ frozen: evolve the (negligible) remainder and stop jumping.
            PdeSegment seg = solve_segment(plan, v, t_end - t, p.dt, sink, p.alpha);
            book_segment(seg);
            v = seg.end;
            t = t_end;
            break;
        }
        if (tau >= budget) {
            traj.stopped = true;
            break;
        }
        const double threshold = std::min(next_clock, budget);
        auto scan = detail::scan_for_crossing(plan, v, t_end - t, threshold - tau, p.dt,
                                              sink, p.alpha);
        if (!scan.crossed) {
            book_segment(scan.segment);
            tau += scan.segment.tau_increment();
            v = std::move(scan.segment.end);
            t = t_end;
            break;
        }
        // Re-solve the truncated segment so the stored path is literally
        // solve_segment(start, d*) and τ comes from its actual norm trace.
        PdeSegment seg = solve_segment(plan, v, scan.d_star, p.dt, sink, p.alpha);
        book_segment(seg);
        tau += seg.tau_increment();
        v = seg.end;
        t += scan.d_star;
        if (next_clock > budget) {
            traj.stopped = true;
            break;
        }
        if (integrate(v) < extinction_mass) {
            traj.extinct = true;
            continue;
        }
        DualJump jump;
        jump.t_real = t;
        jump.clock_target = next_clock;
        jump.tau_at_jump = tau;
        jump.height = sample_jump_height(rng, p);
        jump.cell = sample_jump_location_cell(rng, v, p.alpha);
        jump.location = v.grid.center(jump.cell);
        v[jump.cell] += jump.height / dx;
        traj.max_norm_pow = std::max(traj.max_norm_pow, lp_norm_pow(v, p.alpha));
        traj.jumps.push_back(jump);
        next_clock += sample_waiting_time(rng, p);
        if (traj.jumps.size() > 100000)
            throw std::runtime_error("simulate_dual_path: jump count runaway");
        traj.extinct = integrate(v) < extinction_mass;
    }

    traj.final_field = v;
    traj.t_final = t;
    traj.tau_final = tau;
    return traj;
}

// Mean and SE of e^{-⟨φ, Z_Υ⟩} over trajectories.
inline MCSummary dual_exp_pairing_estimator(const std::vector<DualTrajectory>& trajectories,
                                            const Field& phi, std::uint64_t seed = 0) {
    std::vector<double> values;
    values.reserve(trajectories.size());
    for (const auto& traj : trajectories)
        values.push_back(std::exp(-pairing(phi, traj.final_field)));
    return mean_and_se(values, seed);
}

}  // namespace shelab
