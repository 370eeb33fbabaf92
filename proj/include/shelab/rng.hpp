#pragma once

// Replica-indexed RNG streams plus the few scalar laws the simulators draw
// from.  Every Monte Carlo replica owns its own RngStream(seed, stream), so a
// fixed (seed, stream) pair reproduces the same draws bit for bit no matter
// how replicas are scheduled across workers.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace shelab {

// Finalizer from the splitmix64 generator; decorrelates nearby inputs.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : eng_(splitmix64(splitmix64(seed) ^ splitmix64(~stream))) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on the open interval (0,1): never returns 0 or 1, so logs,
    // inverse powers and inverse CDFs are always finite.
    double uniform01() {
        return (static_cast<double>(eng_() >> 12) + 0.5) * 0x1p-52;
    }

    // Exponential with the given rate (mean 1/rate).
    double exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
        return -std::log(uniform01()) / rate;
    }

    // Poisson count.  Chained inversion below mean 10 (one uniform per draw),
    // transformed rejection (Hoermann's PTRD) above; both exact and
    // deterministic given the stream.
    long poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 10.0) return poisson_inversion(mean);
        return poisson_ptrd(mean);
    }

private:
    long poisson_inversion(double mean) {
        const double u = uniform01();
        double p = std::exp(-mean);
        double cum = p;
        long k = 0;
        while (u > cum) {
            ++k;
            p *= mean / static_cast<double>(k);
            cum += p;
            if (k > 2000) break;  // u ~ 1 and rounding exhausted the tail
        }
        return k;
    }

    long poisson_ptrd(double mu) {
        const double smu = std::sqrt(mu);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = uniform01() - 0.5;
            double v = uniform01();
            const double us = 0.5 - std::fabs(u);
            const long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + mu + 0.43));
            if (us >= 0.07 && v <= v_r) return k;
            if (k < 0 || (us < 0.013 && v > us)) continue;
            const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            const double rhs = k * std::log(mu) - mu - std::lgamma(static_cast<double>(k) + 1.0);
            if (lhs <= rhs) return k;
        }
    }

    std::mt19937_64 eng_;
};

}  // namespace shelab
