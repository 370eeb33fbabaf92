#pragma once

// Forward simulator for the stochastic heat equation with multiplicative
// spectrally positive stable noise,
//
//     ∂Y/∂t = ½ ΔY + Y_{t-}^β · dL,
//
// in mild form with thinned jumps.  One Euler step of length dt:
//
//   1. per cell i, draw K_i ~ Poisson(dt·dx·y_i^{αβ}·M(ε)) jumps; each jump
//      of size z = ε·u^{-1/α} deposits z/dx into the cell,
//   2. subtract the exact compensator drift dt·y_i^{αβ}·m₁(ε),
//   3. clamp negative cells at zero (logging the clamped mass),
//   4. apply the heat semigroup P_dt.
//
// Steps 1-2 have conditional mean zero given Y, and P_dt has unit-mass
// weights, so E Y_t = P_t Y_0 holds exactly up to the (logged, tiny)
// clamping — the mean-field identity the acceptance checks lean on.
//
// Why rate ∝ y^{αβ}: a noise jump z lands in the field as y^β·z.  Thinning
// the *field* jumps at ε means keeping z > ε/y^β, which by the m₀ scaling
// m₀(ε/y^β,∞) = y^{αβ}·M(ε) happens at rate dt·dx·y^{αβ}·M(ε), with the kept
// field jumps again Pareto from ε; the matching compensator is
// y^β·m₁(ε/y^β) = y^{αβ}·m₁(ε).

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "shelab/grid.hpp"
#include "shelab/heat.hpp"
#include "shelab/levy.hpp"
#include "shelab/mc.hpp"
#include "shelab/params.hpp"
#include "shelab/rng.hpp"

namespace shelab {

// Precomputed pairings for the Laplace-martingale residual
//   M_t(ψ) = e^{-⟨Y_t,ψ⟩} - e^{-⟨Y_0,ψ⟩}
//            - ∫₀^t e^{-⟨Y_s,ψ⟩} ( -⟨Y_s, ½Δψ⟩ + ⟨Y_s^{αβ}, ψ^α⟩ ) ds.
struct MartingaleProbe {
    Field psi;
    Field half_laplacian_psi;
    Field psi_pow_alpha;

    static MartingaleProbe from_fields(const Field& psi, const Field& laplacian_psi,
                                       double alpha) {
        require_same_grid(psi, laplacian_psi, "MartingaleProbe");
        MartingaleProbe p;
        p.psi = psi;
        p.half_laplacian_psi = laplacian_psi;
        for (auto& x : p.half_laplacian_psi.v) x *= 0.5;
        p.psi_pow_alpha = psi;
        for (auto& x : p.psi_pow_alpha.v) x = std::pow(x, alpha);
        return p;
    }
};

struct PathSample {
    std::vector<double> times;
    std::vector<Field> fields;          // snapshots at `times`
    std::vector<double> clamp_log;      // negative mass clamped, per step
    std::vector<double> drift_integral; // martingale drift ∫..ds at `times`
    bool aborted = false;

    double total_clamped() const {
        double s = 0.0;
        for (double c : clamp_log) s += c;
        return s;
    }
};

// One Euler step.  Returns the post-step field; adds the clamped negative
// mass to *clamped_mass if given.
inline Field simulate_y_step(SemigroupPlan& plan, const Field& y, const ModelParams& p,
                             const LevyMeasure& levy, RngStream& rng,
                             double* clamped_mass = nullptr) {
    const double dx = y.grid.dx();
    const double ab = p.alphabeta();
    const double rate_coeff = p.dt * dx * levy.tail_mass(p.eps_jump);
    const double drift_coeff = p.dt * levy.first_moment_tail(p.eps_jump);
    const double neg_inv_alpha = -1.0 / p.alpha;

    Field v(y.grid);
    double clamped = 0.0;
    for (int i = 0; i < y.size(); ++i) {
        const double yi = y[i];
        if (yi <= 0.0) {
            v[i] = 0.0;
            continue;
        }
        const double y_ab = std::pow(yi, ab);
        double cell = yi - drift_coeff * y_ab;
        const long k = rng.poisson(rate_coeff * y_ab);
        for (long j = 0; j < k; ++j)
            cell += p.eps_jump * std::pow(rng.uniform01(), neg_inv_alpha) / dx;
        if (cell < 0.0) {
            clamped += -cell * dx;
            cell = 0.0;
        }
        v[i] = cell;
    }
    if (clamped_mass) *clamped_mass += clamped;
    return plan.apply(v, p.dt);
}

// Simulate from Y_0 = phi and snapshot at the requested times, which must sit
// on the step lattice (k·dt within 1e-9).  A replica whose mass exceeds 1e6
// times the initial mass is marked aborted and abandoned.  When a probe is
// given, the drift integral of the Laplace martingale is accumulated with the
// left-endpoint rule (the integrand is adapted: evaluated at Y_{s-}).
inline PathSample simulate_y_path(SemigroupPlan& plan, const Field& phi,
                                  const ModelParams& p, std::span<const double> times,
                                  RngStream& rng, const MartingaleProbe* probe = nullptr) {
    if (times.empty()) throw std::invalid_argument("simulate_y_path: no snapshot times");
    std::vector<long> steps_at;
    long last_step = 0;
    for (double t : times) {
        const double k = std::round(t / p.dt);
        if (!(t >= 0.0) || std::fabs(t - k * p.dt) > 1e-9)
            throw std::invalid_argument("simulate_y_path: time off the dt lattice");
        steps_at.push_back(static_cast<long>(k));
        last_step = std::max(last_step, static_cast<long>(k));
    }

    const LevyMeasure levy(p.alpha);
    const double mass_cap = 1e6 * std::max(integrate(phi), 1e-12);

    PathSample out;
    Field y = phi;
    double drift = 0.0;
    auto snapshot = [&](long step) {
        for (std::size_t i = 0; i < steps_at.size(); ++i) {
            if (steps_at[i] == step) {
                out.times.push_back(times[i]);
                out.fields.push_back(y);
                if (probe) out.drift_integral.push_back(drift);
            }
        }
    };

    snapshot(0);
    for (long s = 0; s < last_step; ++s) {
        if (probe) {
            const double e = std::exp(-pairing(y, probe->psi));
            Field y_ab = y;
            for (auto& x : y_ab.v) x = x > 0.0 ? std::pow(x, p.alphabeta()) : 0.0;
            drift += p.dt * e *
                     (-pairing(y, probe->half_laplacian_psi) +
                      pairing(y_ab, probe->psi_pow_alpha));
        }
        double clamped = 0.0;
        y = simulate_y_step(plan, y, p, levy, rng, &clamped);
        out.clamp_log.push_back(clamped);
        if (integrate(y) > mass_cap) {
            out.aborted = true;
            return out;
        }
        snapshot(s + 1);
    }
    return out;
}

// Mean and SE of e^{-⟨Y_t, ψ⟩} over the non-aborted replicas holding a
// snapshot at time t.
inline MCSummary exp_pairing_estimator(const std::vector<PathSample>& paths,
                                       const Field& psi, double t,
                                       std::uint64_t seed = 0) {
    std::vector<double> values;
    long aborted = 0;
    for (const auto& path : paths) {
        if (path.aborted) {
            ++aborted;
            continue;
        }
        bool found = false;
        for (std::size_t i = 0; i < path.times.size(); ++i) {
            if (path.times[i] == t) {
                values.push_back(std::exp(-pairing(path.fields[i], psi)));
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("exp_pairing_estimator: no snapshot at t");
    }
    return mean_and_se(values, seed, aborted);
}

}  // namespace shelab
