#pragma once

// Model parameters for the forward equation
//
//     ∂Y/∂t = ½ ΔY + Y_{t-}^β · noise,      noise spectrally positive, index α,
//
// and for its approximating dual jump-PDE process at level n.  The admissible
// regime is 1 < αβ < α < 2, so β ∈ (1/α·1, 1) with αβ > 1.
//
// Derived constants at level n (Γ is the gamma function):
//   b_n        = αβ/Γ(2-αβ) · n^{αβ-1}      linear-in-y calibration coefficient
//   η          = αβ(αβ-1)/Γ(2-αβ)           jump-kernel normalization
//   clock_rate = n^{αβ}(αβ-1)/Γ(2-αβ)       rate of the internal-time jump clock
//   sink       = sink_factor · b_n          coefficient of the -v^α PDE sink
//
// sink_factor defaults to 1/2: the dual PDE runs in real time while the jump
// clock runs in internal time τ with dτ/dt = ½‖v‖_α^α, and with the ½ the
// sink drains mass at rate b_n per unit internal time — exactly the mean mass
// influx of the clock's jumps (rate · mean height = clock_rate · (1/n) ·
// αβ/(αβ-1) = b_n), so jump gains and sink losses balance in expectation.

#include <cmath>
#include <stdexcept>

#include "shelab/grid.hpp"

namespace shelab {

struct ModelParams {
    double alpha = 1.5;
    double beta = 0.8;
    double n = 16.0;          // dual approximation level
    double eps_jump = 1e-3;   // thinning cutoff for the forward noise
    double dt = 1e-3;
    double horizon = 0.5;
    double sink_factor = 0.5;
    GridSpec grid{};

    void validate() const {
        grid.validate();
        if (!(alpha > 1.0 && alpha < 2.0))
            throw std::invalid_argument("ModelParams: need 1 < alpha < 2");
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("ModelParams: need 0 < beta < 1");
        if (!(alpha * beta > 1.0))
            throw std::invalid_argument("ModelParams: need alpha*beta > 1");
        if (!(n >= 1.0)) throw std::invalid_argument("ModelParams: need n >= 1");
        if (!(eps_jump > 0.0)) throw std::invalid_argument("ModelParams: need eps_jump > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("ModelParams: need dt > 0");
        if (!(horizon > 0.0)) throw std::invalid_argument("ModelParams: need horizon > 0");
        if (!(sink_factor >= 0.0))
            throw std::invalid_argument("ModelParams: need sink_factor >= 0");
    }

    double alphabeta() const { return alpha * beta; }

    double b_n() const {
        const double ab = alphabeta();
        return ab / std::tgamma(2.0 - ab) * std::pow(n, ab - 1.0);
    }

    double eta() const {
        const double ab = alphabeta();
        return ab * (ab - 1.0) / std::tgamma(2.0 - ab);
    }

    double clock_rate() const {
        const double ab = alphabeta();
        return std::pow(n, ab) * (ab - 1.0) / std::tgamma(2.0 - ab);
    }

    double sink() const { return sink_factor * b_n(); }

    // Internal-time budget k_n = ln n at which the dual is stopped.
    double clock_budget() const { return std::log(n); }

    ModelParams with_n(double level) const {
        ModelParams p = *this;
        p.n = level;
        return p;
    }
};

// Scale of the theoretical duality-gap envelope, n^{-(α-αβ)/2} · ln n.
inline double theory_gap_scale(double n, double alpha, double beta) {
    return std::pow(n, -0.5 * (alpha - alpha * beta)) * std::log(n);
}

}  // namespace shelab
