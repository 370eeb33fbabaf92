#pragma once

// Monte Carlo bookkeeping: per-replica parallel map with deterministic
// reduction, and mean / standard-error summaries.
//
// Replica i always computes the same value regardless of worker count or
// scheduling (it owns RngStream(seed, stream_i)); results are stored by
// replica index and reduced in index order, so --workers 1 and --workers k
// produce identical bytes.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace shelab {

struct MCSummary {
    double estimate = 0.0;
    double std_error = 0.0;
    long replicas = 0;  // replicas contributing to the estimate
    long aborted = 0;   // replicas excluded (blow-up guard etc.)
    std::uint64_t seed = 0;

    bool operator==(const MCSummary&) const = default;
};

// Two-pass mean and standard error of the mean, accumulated in index order.
inline MCSummary mean_and_se(const std::vector<double>& values, std::uint64_t seed = 0,
                             long aborted = 0) {
    MCSummary s;
    s.seed = seed;
    s.aborted = aborted;
    s.replicas = static_cast<long>(values.size());
    if (values.empty()) return s;
    double sum = 0.0;
    for (double x : values) sum += x;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double x : values) ss += (x - mean) * (x - mean);
    s.estimate = mean;
    if (values.size() > 1) {
        const auto n = static_cast<double>(values.size());
        s.std_error = std::sqrt(ss / (n * (n - 1.0)));
    }
    return s;
}

// Evaluate fn(0..count-1), filling results[i] = fn(i).  Work is handed out by
// an atomic counter; determinism comes from per-index independence, not from
// scheduling.  The first worker exception, if any, is rethrown.
template <typename R, typename Fn>
std::vector<R> parallel_map(long count, int workers, Fn&& fn) {
    if (count < 0) throw std::invalid_argument("parallel_map: need count >= 0");
    std::vector<R> results(static_cast<std::size_t>(count));
    if (count == 0) return results;
    if (workers <= 1) {
        for (long i = 0; i < count; ++i) results[static_cast<std::size_t>(i)] = fn(i);
        return results;
    }
    std::atomic<long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                results[static_cast<std::size_t>(i)] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(error);
    return results;
}

}  // namespace shelab
