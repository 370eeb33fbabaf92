#pragma once

// Discrete heat semigroup P_t on a uniform grid.  The kernel
//
//     p_t(x) = (2πt)^{-1/2} exp(-x²/(2t))
//
// is sampled at cell-center offsets, renormalized so the discrete weights sum
// to one, and applied by circular FFT convolution on a zero-padded
// power-of-two buffer (padding ≥ 2·cells keeps the convolution linear).  The
// weights are nonnegative with unit sum, so P_t preserves nonnegativity and
// total mass and is a sup-norm contraction; renormalization also makes the
// discrete identity E Y_t = P_t Y_0 of the forward scheme exact.
//
// Each SemigroupPlan owns its FFTW buffers and plans; concurrent use requires
// one plan instance per worker.  Buffers come from fftw_malloc (fixed
// alignment) and plans use FFTW_ESTIMATE, so results are bit-reproducible.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "shelab/grid.hpp"

namespace shelab {

inline double heat_kernel(double t, double x) {
    if (!(t > 0.0)) throw std::invalid_argument("heat_kernel: need t > 0");
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

class SemigroupPlan {
public:
    // Below this horizon the kernel is sub-cell-width for any sane grid and
    // apply() short-circuits to the identity.
    static constexpr double t_identity = 1e-8;

    explicit SemigroupPlan(const GridSpec& grid) : grid_(grid) {
        grid_.validate();
        padded_ = 1;
        while (padded_ < 2 * grid_.cells) padded_ *= 2;
        spec_n_ = padded_ / 2 + 1;

        std::lock_guard<std::mutex> lock(planner_mutex());
        real_ = fftw_alloc_real(static_cast<std::size_t>(padded_));
        spec_ = fftw_alloc_complex(static_cast<std::size_t>(spec_n_));
        kernel_hat_.resize(static_cast<std::size_t>(spec_n_));
        fwd_ = fftw_plan_dft_r2c_1d(padded_, real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(padded_, spec_, real_, FFTW_ESTIMATE);
        if (!real_ || !spec_ || !fwd_ || !bwd_)
            throw std::runtime_error("SemigroupPlan: FFTW setup failed");
    }

    ~SemigroupPlan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }

    SemigroupPlan(const SemigroupPlan&) = delete;
    SemigroupPlan& operator=(const SemigroupPlan&) = delete;

    const GridSpec& grid() const { return grid_; }
    int padded_size() const { return padded_; }

    // P_t f.  Nonnegative inputs stay exactly nonnegative (FFT round-off
    // undershoot is clipped at zero, where the exact convolution is >= 0).
    Field apply(const Field& f, double t) {
        if (!(f.grid == grid_))
            throw std::invalid_argument("SemigroupPlan::apply: field grid mismatch");
        if (!(t >= 0.0) || !std::isfinite(t))
            throw std::invalid_argument("SemigroupPlan::apply: need finite t >= 0");
        if (t < t_identity) return f;

        ensure_kernel(t);

        const int n = grid_.cells;
        bool nonneg = true;
        for (int i = 0; i < n; ++i) {
            real_[i] = f[i];
            if (f[i] < 0.0) nonneg = false;
        }
        for (int i = n; i < padded_; ++i) real_[i] = 0.0;
        fftw_execute(fwd_);
        for (int k = 0; k < spec_n_; ++k) {
            const std::complex<double> z(spec_[k][0], spec_[k][1]);
            const std::complex<double> w = z * kernel_hat_[static_cast<std::size_t>(k)];
            spec_[k][0] = w.real();
            spec_[k][1] = w.imag();
        }
        fftw_execute(bwd_);

        Field out(grid_);
        if (nonneg) {
            for (int i = 0; i < n; ++i) out[i] = real_[i] > 0.0 ? real_[i] : 0.0;
        } else {
            for (int i = 0; i < n; ++i) out[i] = real_[i];
        }
        return out;
    }

private:
    void ensure_kernel(double t) {
        if (t == kernel_t_) return;
        const double dx = grid_.dx();
        std::vector<double> w(static_cast<std::size_t>(padded_));
        double sum = 0.0;
        for (int j = 0; j < padded_; ++j) {
            const int off = (j <= padded_ / 2) ? j : j - padded_;
            w[static_cast<std::size_t>(j)] = heat_kernel(t, off * dx);
            sum += w[static_cast<std::size_t>(j)];
        }
        // Renormalize to unit discrete mass and fold the inverse-FFT 1/M
        // scale into the cached spectrum.
        const double scale = 1.0 / (sum * padded_);
        for (int j = 0; j < padded_; ++j) real_[j] = w[static_cast<std::size_t>(j)] * scale;
        fftw_execute(fwd_);
        for (int k = 0; k < spec_n_; ++k)
            kernel_hat_[static_cast<std::size_t>(k)] = {spec_[k][0], spec_[k][1]};
        kernel_t_ = t;
    }

    static std::mutex& planner_mutex() {
        static std::mutex m;
        return m;
    }

    GridSpec grid_;
    int padded_ = 0;
    int spec_n_ = 0;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    std::vector<std::complex<double>> kernel_hat_;
    double kernel_t_ = -1.0;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

inline Field apply_semigroup(SemigroupPlan& plan, const Field& f, double t) {
    return plan.apply(f, t);
}

// Per-thread plan cache: replica workers call this instead of building a
// fresh plan per replica.  Results do not depend on which thread runs a
// replica (plans for equal grids are interchangeable).
inline SemigroupPlan& worker_plan(const GridSpec& grid) {
    thread_local std::unique_ptr<SemigroupPlan> plan;
    if (!plan || !(plan->grid() == grid)) plan = std::make_unique<SemigroupPlan>(grid);
    return *plan;
}

}  // namespace shelab
