#pragma once
/**
 * @file montecarlo.hpp
 * @brief Seed-indexed Monte Carlo driver. Samples are computed by a pool of
 *        threads but stored by seed and reduced in seed order, so results do
 *        not depend on the worker count.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace stochwave {

/// Worker count: STOCHWAVE_WORKERS if set and positive, else the hardware concurrency.
inline unsigned default_workers() {
    if (const char* env = std::getenv("STOCHWAVE_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs job(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
inline void parallel_for_index(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned w = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    for (unsigned k = 0; k < w; ++k) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct McEstimate {
    double mean = 0.0;
    double ci_halfwidth = 0.0;  ///< 1.96 * sample standard deviation / sqrt(N)
    std::vector<double> samples;
};

/// Vector-valued samples: mean and CI per component, plus the full per-seed matrix.
struct McVectorEstimate {
    std::vector<double> mean;
    std::vector<double> ci_halfwidth;
    std::vector<std::vector<double>> samples;  ///< [seed][component]
};

inline McVectorEstimate mc_expectation_vector(const std::function<std::vector<double>(std::uint64_t)>& runner,
                                              std::size_t N, std::uint64_t base_seed, unsigned workers = 0) {
    if (N < 2) throw std::invalid_argument("mc.samples: must be >= 2");
    if (workers == 0) workers = default_workers();
    McVectorEstimate est;
    est.samples.resize(N);
    parallel_for_index(N, workers, [&](std::size_t i) { est.samples[i] = runner(base_seed + i); });
    const std::size_t m = est.samples[0].size();
    for (const auto& s : est.samples)
        if (s.size() != m) throw std::runtime_error("mc_expectation: runner returned inconsistent lengths");
    est.mean.assign(m, 0.0);
    est.ci_halfwidth.assign(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < N; ++i) sum += est.samples[i][c];
        const double mean = sum / N;
        double ss = 0.0;
        for (std::size_t i = 0; i < N; ++i) ss += (est.samples[i][c] - mean) * (est.samples[i][c] - mean);
        est.mean[c] = mean;
        est.ci_halfwidth[c] = 1.96 * std::sqrt(ss / (N - 1)) / std::sqrt(double(N));
    }
    return est;
}

/// Sample mean and 95% normal CI over seeds base_seed .. base_seed + N - 1.
inline McEstimate mc_expectation(const std::function<double(std::uint64_t)>& runner, std::size_t N,
                                 std::uint64_t base_seed, unsigned workers = 0) {
    auto v = mc_expectation_vector([&](std::uint64_t s) { return std::vector<double>{runner(s)}; }, N, base_seed,
                                   workers);
    McEstimate e;
    e.mean = v.mean[0];
    e.ci_halfwidth = v.ci_halfwidth[0];
    for (const auto& s : v.samples) e.samples.push_back(s[0]);
    return e;
}

}  // namespace stochwave
