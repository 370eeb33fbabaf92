#pragma once

// Spectrally positive α-stable jump structure.  The driving noise has Lévy
// measure
//
//     m₀(dz) = c_α · z^{-1-α} dz on z > 0,   c_α = α(α-1)/Γ(2-α),
//
// normalized so that the compensated integral ∫(e^{-λz} - 1 + λz) m₀(dz)
// equals λ^α exactly, giving the Laplace functional
// E exp(-λ·L_t(A)) = exp(+λ^α · t·|A|).
//
// Simulation thins the small jumps at a cutoff ε and keeps the exact
// compensator of the retained band:
//   tail mass        M(ε)  = ∫_ε^∞ m₀(dz)    = (α-1)/Γ(2-α) · ε^{-α}
//   tail first moment m₁(ε) = ∫_ε^∞ z m₀(dz) = α/Γ(2-α) · ε^{1-α}
//   dropped variance  ∫_0^ε z² m₀(dz)        = c_α ε^{2-α}/(2-α)
// Retained jumps are Pareto: z = ε·u^{-1/α}, u uniform on (0,1).

#include <cmath>
#include <stdexcept>

#include "shelab/rng.hpp"

namespace shelab {

struct LevyMeasure {
    double alpha;

    explicit LevyMeasure(double a) : alpha(a) {
        if (!(alpha > 1.0 && alpha < 2.0))
            throw std::invalid_argument("LevyMeasure: need 1 < alpha < 2");
    }

    double c_alpha() const { return alpha * (alpha - 1.0) / std::tgamma(2.0 - alpha); }

    double density(double z) const {
        if (!(z > 0.0)) throw std::invalid_argument("LevyMeasure::density: need z > 0");
        return c_alpha() * std::pow(z, -1.0 - alpha);
    }

    double tail_mass(double eps) const {
        if (!(eps > 0.0)) throw std::invalid_argument("LevyMeasure::tail_mass: need eps > 0");
        return (alpha - 1.0) / std::tgamma(2.0 - alpha) * std::pow(eps, -alpha);
    }

    double first_moment_tail(double eps) const {
        if (!(eps > 0.0))
            throw std::invalid_argument("LevyMeasure::first_moment_tail: need eps > 0");
        return alpha / std::tgamma(2.0 - alpha) * std::pow(eps, 1.0 - alpha);
    }

    // Second moment of the dropped small-jump band, ∫_0^ε z² m₀(dz).
    double small_jump_m2(double eps) const {
        if (!(eps > 0.0))
            throw std::invalid_argument("LevyMeasure::small_jump_m2: need eps > 0");
        return c_alpha() * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
    }
};

// Inverse CDF of the normalized tail law m₀|_(ε,∞)/M(ε): z = ε·u^{-1/α}.
inline double sample_pareto_jump_size(double eps, double u, double alpha) {
    if (!(eps > 0.0))
        throw std::invalid_argument("sample_pareto_jump_size: need eps > 0");
    if (!(u > 0.0 && u < 1.0))
        throw std::invalid_argument("sample_pareto_jump_size: need u in (0,1)");
    return eps * std::pow(u, -1.0 / alpha);
}

// One compensated noise increment over a space-time box of the given volume:
//   Σ_{k=1}^{K} z_k - volume·m₁(ε),  K ~ Poisson(volume·M(ε)).
// Its conditional mean is -volume·∫_0^ε z m₀(dz) → 0 as ε → 0.
inline double sample_noise_increment(RngStream& rng, double volume, double eps,
                                     const LevyMeasure& levy) {
    if (!(volume >= 0.0))
        throw std::invalid_argument("sample_noise_increment: need volume >= 0");
    const long k = rng.poisson(volume * levy.tail_mass(eps));
    const double neg_inv_alpha = -1.0 / levy.alpha;
    double sum = 0.0;
    for (long i = 0; i < k; ++i) sum += std::pow(rng.uniform01(), neg_inv_alpha);
    return eps * sum - volume * levy.first_moment_tail(eps);
}

// Exact Laplace functional of the untruncated noise on a set of the given
// area: E exp(-λ L_t(A)) = exp(+λ^α t |A|).
inline double laplace_functional_target(double lambda, double t, double area, double alpha) {
    return std::exp(std::pow(lambda, alpha) * t * area);
}

// Upper bound on the truncation bias of the empirical Laplace functional:
// dropping jumps below ε shifts -log E e^{-λL} by at most λ²/2·t|A|·∫_0^ε z²m₀.
inline double laplace_truncation_bias_bound(double lambda, double t, double area, double eps,
                                            const LevyMeasure& levy) {
    const double d = 0.5 * lambda * lambda * t * area * levy.small_jump_m2(eps);
    return laplace_functional_target(lambda, t, area, levy.alpha) * d;
}

}  // namespace shelab
