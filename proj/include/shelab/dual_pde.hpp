#pragma once

// Deterministic flow between jumps of the dual process:
//
//     ∂v/∂t = ½ Δv - sink · v^α,   v(0) = v₀ ≥ 0,
//
// advanced by Strang splitting  reaction(dt/2) ∘ heat(dt) ∘ reaction(dt/2).
// The reaction half-steps use the exact solution of v' = -c v^α,
//
//     v(t) = (v₀^{1-α} + c(α-1) t)^{-1/(α-1)},
//
// so each substep is monotone in v₀, maps [0,∞) into itself and fixes 0;
// combined with the nonnegative unit-mass heat weights the full step
// preserves positivity and the cell-wise comparison order exactly.
//
// A segment records the norm trace (r, ‖v_r‖_α^α) at every step boundary;
// the internal clock of the dual process is τ(t) = ½∫₀^t ‖v_r‖_α^α dr,
// accumulated from the trace by the trapezoid rule.

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shelab/grid.hpp"
#include "shelab/heat.hpp"

namespace shelab {

// Exact solution of v' = -c v^α over one interval, cell-wise.
// c = 0 or dt = 0 is exactly the identity.
inline Field reaction_substep(const Field& v, double c, double dt, double alpha) {
    if (!(c >= 0.0)) throw std::invalid_argument("reaction_substep: need c >= 0");
    if (!(dt >= 0.0)) throw std::invalid_argument("reaction_substep: need dt >= 0");
    if (c == 0.0 || dt == 0.0) return v;
    const double am1 = alpha - 1.0;
    const double incr = c * am1 * dt;
    Field out(v.grid);
    for (int i = 0; i < v.size(); ++i) {
        const double x = v[i];
        assert(x >= 0.0);
        out[i] = x > 0.0 ? std::pow(std::pow(x, 1.0 - alpha) + incr, -1.0 / am1) : 0.0;
    }
    return out;
}

// One Strang step of length dt.  With sink = 0 this is exactly one heat step.
inline Field pde_step(SemigroupPlan& plan, const Field& v, double dt, double sink,
                      double alpha) {
    Field half = reaction_substep(v, sink, 0.5 * dt, alpha);
    Field heated = plan.apply(half, dt);
    return reaction_substep(heated, sink, 0.5 * dt, alpha);
}

struct PdeSegment {
    double duration = 0.0;
    // (r, ‖v_r‖_α^α) at r = 0, dt, 2dt, ..., duration (last interval may be
    // a partial step).
    std::vector<std::pair<double, double>> norm_trace;
    Field end;

    // Internal-time increment ½∫₀^duration ‖v‖_α^α dr, trapezoid on the trace.
    double tau_increment() const {
        double acc = 0.0;
        for (std::size_t i = 1; i < norm_trace.size(); ++i) {
            const auto& [r0, n0] = norm_trace[i - 1];
            const auto& [r1, n1] = norm_trace[i];
            acc += 0.25 * (r1 - r0) * (n0 + n1);
        }
        return acc;
    }

    double max_norm_pow() const {
        double m = 0.0;
        for (const auto& [r, nn] : norm_trace) m = std::max(m, nn);
        return m;
    }
};

// Advance v₀ over [0, duration] with uniform steps dt plus one partial tail
// step when duration is not a multiple of dt.  Tail steps shorter than
// dt·1e-9 are dropped (the flow over them is the identity to round-off).
inline PdeSegment solve_segment(SemigroupPlan& plan, const Field& v0, double duration,
                                double dt, double sink, double alpha) {
    if (!(duration >= 0.0))
        throw std::invalid_argument("solve_segment: need duration >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("solve_segment: need dt > 0");

    PdeSegment seg;
    seg.duration = duration;
    const long steps = static_cast<long>(std::floor(duration / dt * (1.0 + 1e-12)));
    const double tail = duration - static_cast<double>(steps) * dt;

    Field v = v0;
    seg.norm_trace.emplace_back(0.0, lp_norm_pow(v, alpha));
    for (long s = 0; s < steps; ++s) {
        v = pde_step(plan, v, dt, sink, alpha);
        seg.norm_trace.emplace_back(static_cast<double>(s + 1) * dt, lp_norm_pow(v, alpha));
    }
    if (tail > dt * 1e-9) {
        v = pde_step(plan, v, tail, sink, alpha);
        seg.norm_trace.emplace_back(duration, lp_norm_pow(v, alpha));
    }
    seg.end = std::move(v);
    return seg;
}

}  // namespace shelab
