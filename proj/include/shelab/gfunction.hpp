#pragma once

// The compensated-exponential moment of the dual jump kernel,
//
//     g(r, y) = ∫₀^r (e^{-λy} - 1 + λy) · λ^{-αβ-1} dλ,
//
// which measures how much of the nonlinearity y^{αβ} the level-n dual (which
// only sees jump scales above 1/n) fails to reproduce: the duality gap is
// driven by g(1/n, ·).  g is increasing in both r and y.
//
// Quadrature: substituting u = λ^{2-αβ} flattens the integrable singularity
// at λ = 0.  With E(x) = e^{-x} - 1 + x and G(x) = E(x)/x² (so G(0) = ½) the
// integrand becomes
//
//     ∫₀^{r^{2-αβ}} q·y²·G(y·u^q) du,       q = 1/(2-αβ),
//
// bounded and continuous on the closed interval, handled by adaptive Simpson.
//
// Closed-form envelope: from E(x) ≤ x^p/p with p = α(1+β)/2 ∈ (1,2),
//
//     g(1/n, y) ≤ (2/(α(1+β))) · y^{α(1+β)/2} · (2/(α-αβ)) · n^{-(α-αβ)/2}.

#include <cmath>
#include <stdexcept>

namespace shelab {

namespace detail {

// (e^{-x} - 1 + x)/x², extended continuously by 1/2 at x = 0.
inline double compensated_exp_over_x2(double x) {
    if (x < 1e-4)
        return 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x * x * x * x / 720.0;
    return (std::expm1(-x) + x) / (x * x);
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

inline double g_function(double r, double y, double alphabeta) {
    if (!(r > 0.0)) throw std::invalid_argument("g_function: need r > 0");
    if (!(y >= 0.0)) throw std::invalid_argument("g_function: need y >= 0");
    if (!(alphabeta > 1.0 && alphabeta < 2.0))
        throw std::invalid_argument("g_function: need 1 < alphabeta < 2");
    if (y == 0.0) return 0.0;

    const double q = 1.0 / (2.0 - alphabeta);
    const double upper = std::pow(r, 2.0 - alphabeta);
    const auto integrand = [&](double u) {
        return q * y * y * detail::compensated_exp_over_x2(y * std::pow(u, q));
    };
    // Integrand magnitude ~ q·y²/2; scale the absolute tolerance with it.
    const double tol = 1e-12 * (0.5 * q * y * y * upper + 1e-300);
    return detail::adaptive_simpson(integrand, 0.0, upper, tol);
}

// Envelope of g(1/n, y); n ≥ 1.
inline double g_function_envelope(double n, double y, double alpha, double beta) {
    if (!(n >= 1.0)) throw std::invalid_argument("g_function_envelope: need n >= 1");
    const double p = 0.5 * alpha * (1.0 + beta);
    const double gap_exp = 0.5 * (alpha - alpha * beta);
    return (1.0 / p) * std::pow(y, p) * (1.0 / gap_exp) * std::pow(n, -gap_exp);
}

}  // namespace shelab
