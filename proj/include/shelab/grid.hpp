#pragma once

// Uniform 1-d grid on [left, right] and the piecewise-constant fields living
// on it.  A Field value f[i] is the cell average on cell i; integrals,
// L^p norms and pairings are plain cell sums times dx.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace shelab {

struct GridSpec {
    double left = -10.0;
    double right = 10.0;
    int cells = 400;

    GridSpec() = default;
    GridSpec(double l, double r, int c) : left(l), right(r), cells(c) { validate(); }

    void validate() const {
        if (!std::isfinite(left) || !std::isfinite(right) || right <= left)
            throw std::invalid_argument("GridSpec: need finite left < right");
        if (cells < 8)
            throw std::invalid_argument("GridSpec: need at least 8 cells");
    }

    double dx() const { return (right - left) / cells; }
    double center(int i) const { return left + (i + 0.5) * dx(); }

    // Cell containing x; the right domain endpoint belongs to the last cell.
    int cell_of(double x) const {
        if (!(x >= left && x <= right))
            throw std::invalid_argument("GridSpec::cell_of: x outside domain");
        int i = static_cast<int>(std::floor((x - left) / dx()));
        if (i < 0) i = 0;
        if (i >= cells) i = cells - 1;
        return i;
    }

    bool operator==(const GridSpec& o) const {
        return left == o.left && right == o.right && cells == o.cells;
    }
};

struct Field {
    GridSpec grid;
    std::vector<double> v;

    Field() = default;
    explicit Field(const GridSpec& g) : grid(g), v(static_cast<std::size_t>(g.cells), 0.0) {}

    static Field zeros(const GridSpec& g) { return Field(g); }

    int size() const { return grid.cells; }
    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

inline void require_same_grid(const Field& a, const Field& b, const char* who) {
    if (!(a.grid == b.grid))
        throw std::invalid_argument(std::string(who) + ": fields live on different grids");
}

// ∫ f dx = Σ_i f_i · dx
inline double integrate(const Field& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s * f.grid.dx();
}

// Σ_i |f_i|^p · dx, the discrete ‖f‖_p^p.  Requires p >= 1.
inline double lp_norm_pow(const Field& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm_pow: need p >= 1");
    double s = 0.0;
    for (double x : f.v) s += std::pow(std::fabs(x), p);
    return s * f.grid.dx();
}

// ⟨f, g⟩ = Σ_i f_i g_i · dx on a shared grid.
inline double pairing(const Field& f, const Field& g) {
    require_same_grid(f, g, "pairing");
    double s = 0.0;
    for (int i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s * f.grid.dx();
}

inline double field_min(const Field& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::min(m, x);
    return m;
}

inline double field_max(const Field& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::max(m, x);
    return m;
}

inline double sup_abs_diff(const Field& a, const Field& b) {
    require_same_grid(a, b, "sup_abs_diff");
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace shelab
