#pragma once

// Singular-kernel Gronwall inequality.  If a bounded measurable f ≥ 0 obeys
//
//     f(t) ≤ c + c ∫₀^t (t-r)^{-γ} f(r) dr   on [0, T],  0 < γ < 1,
//
// then substituting the inequality into itself k times yields
//
//     f(t) ≤ c_k(t) + c'_k ∫₀^t (t-r)^{e_k} f(r) dr,
//
// with the recursion (B is the Euler beta function)
//
//     e_0 = -γ,  c_0(t) = c,        c'_0 = c,
//     e_{j+1}  = e_j + 1 - γ,
//     c_{j+1}(t) = c_j(t) + c·c'_j · t^{e_j+1}/(e_j+1),
//     c'_{j+1}  = c·c'_j · B(e_j+1, 1-γ),
//
// stopped at the first k with e_k > 0 (k = ceil of γ/(1-γ), i.e. γ < k/(k+1)).
// The kernel is then bounded, (t-r)^{e_k} ≤ T^{e_k}, and the classical
// Gronwall lemma gives the explicit bound
//
//     f(t) ≤ c_k(t) · exp(c'_k · T^{e_k} · t).
//
// For γ near 1 the exponent c'_k·T^{e_k}·t overflows exp(), so the bound is
// also exposed in log form.  The companion Picard oracle iterates the
// *equality* f ↦ c + c∫(t-r)^{-γ}f from f ≡ c; its iterates increase toward
// the extremal solution, which any valid bound must dominate.  The oracle
// integrates the singular kernel exactly against a piecewise-linear
// interpolant on a uniform grid (product integration).

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace shelab {

struct GronwallBound {
    double c = 0.0;
    double gamma = 0.0;
    double T = 0.0;
    int k = 0;                                   // unrolling depth
    double e_k = 0.0;                            // terminal kernel exponent, > 0
    double resolvent_coef = 0.0;                 // c'_k
    std::vector<std::pair<double, double>> poly; // (coef, power) terms of c_k(t)

    // log of the bound; always finite.
    double log_bound(double t) const {
        check_domain(t);
        double ck = 0.0;
        for (const auto& [coef, power] : poly) ck += coef * std::pow(t, power);
        return std::log(ck) + resolvent_coef * std::pow(T, e_k) * t;
    }

    // The bound itself; may overflow to +inf for γ near 1 (the true value is
    // astronomically large there, and +inf compares correctly).
    double bound(double t) const { return std::exp(log_bound(t)); }

private:
    void check_domain(double t) const {
        if (!(t >= 0.0 && t <= T * (1.0 + 1e-9)))
            throw std::invalid_argument("GronwallBound: t outside [0, T]");
    }
};

inline GronwallBound gronwall_bound(double c, double gamma, double T) {
    if (!(c > 0.0)) throw std::invalid_argument("gronwall_bound: need c > 0");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("gronwall_bound: need 0 < gamma < 1");
    if (!(T > 0.0)) throw std::invalid_argument("gronwall_bound: need T > 0");

    auto beta_fn = [](double a, double b) {
        return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
    };

    GronwallBound g;
    g.c = c;
    g.gamma = gamma;
    g.T = T;
    g.poly.emplace_back(c, 0.0);
    double e = -gamma;
    double cp = c;
    int k = 0;
    while (e <= 0.0) {
        const double ep1 = e + 1.0;  // e_j + 1 = (j+1)(1-γ) > 0
        g.poly.emplace_back(c * cp / ep1, ep1);
        cp = c * cp * beta_fn(ep1, 1.0 - gamma);
        e += 1.0 - gamma;
        ++k;
    }
    g.k = k;
    g.e_k = e;
    g.resolvent_coef = cp;
    return g;
}

// Picard iterates of f = c + c∫₀^t (t-r)^{-γ} f(r) dr on the uniform grid
// t_i = i·T/nodes, i = 0..nodes.  Exact product integration of the kernel
// against the piecewise-linear interpolant of the previous iterate:
//
//   ∫_{t_j}^{t_{j+1}} (t_i-r)^{-γ} f(r) dr
//     = h^{1-γ} [ f_j (W0_d - W1_d) + f_{j+1} W1_d ],   d = i - j,
//   W0_d = ΔP1_d/(1-γ),   W1_d = d·ΔP1_d/(1-γ) - ΔP2_d/(2-γ),
//   ΔP1_d = d^{1-γ}-(d-1)^{1-γ},  ΔP2_d = d^{2-γ}-(d-1)^{2-γ}.
inline std::vector<double> picard_extremal_solution(double c, double gamma, double T,
                                                    int nodes, int iterations = 50) {
    if (!(c > 0.0) || !(gamma > 0.0 && gamma < 1.0) || !(T > 0.0))
        throw std::invalid_argument("picard_extremal_solution: bad parameters");
    if (nodes < 2 || iterations < 1)
        throw std::invalid_argument("picard_extremal_solution: bad grid");

    const int n = nodes;
    const double h = T / n;
    std::vector<double> w0(static_cast<std::size_t>(n) + 1),
        w1(static_cast<std::size_t>(n) + 1);
    {
        std::vector<double> p1(static_cast<std::size_t>(n) + 1),
            p2(static_cast<std::size_t>(n) + 1);
        for (int d = 0; d <= n; ++d) {
            p1[static_cast<std::size_t>(d)] = std::pow(d, 1.0 - gamma);
            p2[static_cast<std::size_t>(d)] = std::pow(d, 2.0 - gamma);
        }
        for (int d = 1; d <= n; ++d) {
            const double dp1 = p1[static_cast<std::size_t>(d)] - p1[static_cast<std::size_t>(d - 1)];
            const double dp2 = p2[static_cast<std::size_t>(d)] - p2[static_cast<std::size_t>(d - 1)];
            w0[static_cast<std::size_t>(d)] = dp1 / (1.0 - gamma);
            w1[static_cast<std::size_t>(d)] = d * dp1 / (1.0 - gamma) - dp2 / (2.0 - gamma);
        }
    }
    const double hg = std::pow(h, 1.0 - gamma);

    std::vector<double> f(static_cast<std::size_t>(n) + 1, c), g(f);
    for (int it = 0; it < iterations; ++it) {
        for (int i = 1; i <= n; ++i) {
            double acc = 0.0;
            for (int d = 1; d <= i; ++d) {
                const double fj = f[static_cast<std::size_t>(i - d)];
                const double fj1 = f[static_cast<std::size_t>(i - d + 1)];
                acc += fj * (w0[static_cast<std::size_t>(d)] - w1[static_cast<std::size_t>(d)]) +
                       fj1 * w1[static_cast<std::size_t>(d)];
            }
            g[static_cast<std::size_t>(i)] = c + c * hg * acc;
        }
        g[0] = c;
        std::swap(f, g);
    }
    return f;
}

}  // namespace shelab
