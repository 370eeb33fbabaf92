#pragma once

// Analytic test bumps.  A GaussianBump is mass * N(center, width^2); its
// Laplacian is available in closed form, which gives the martingale checks an
// exact ψ'' with no finite differencing.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "shelab/grid.hpp"

namespace shelab {

struct GaussianBump {
    double center = 0.0;
    double width = 1.0;
    double mass = 1.0;

    void validate() const {
        if (!(width > 0.0)) throw std::invalid_argument("GaussianBump: width must be > 0");
        if (!(mass >= 0.0)) throw std::invalid_argument("GaussianBump: mass must be >= 0");
    }

    double value(double x) const {
        const double z = (x - center) / width;
        return mass / (width * std::sqrt(2.0 * std::numbers::pi)) * std::exp(-0.5 * z * z);
    }

    // d²/dx² of value: value(x) * ((x-c)² - w²) / w⁴.
    double laplacian(double x) const {
        const double d = x - center;
        const double w2 = width * width;
        return value(x) * (d * d - w2) / (w2 * w2);
    }

    Field field(const GridSpec& g) const {
        validate();
        Field f(g);
        for (int i = 0; i < g.cells; ++i) f[i] = value(g.center(i));
        return f;
    }

    Field laplacian_field(const GridSpec& g) const {
        validate();
        Field f(g);
        for (int i = 0; i < g.cells; ++i) f[i] = laplacian(g.center(i));
        return f;
    }
};

}  // namespace shelab
