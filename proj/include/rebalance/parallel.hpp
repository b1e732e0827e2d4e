#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rebalance {

/// Worker cap from REBALANCE_THREADS; 1 when unset or unparseable.
inline unsigned threads_from_env(const char* variable = "REBALANCE_THREADS") {
    const char* raw = std::getenv(variable);
    if (raw == nullptr) {
        return 1;
    }
    try {
        const long value = std::stol(raw);
        return value > 0 ? static_cast<unsigned>(value) : 1U;
    } catch (const std::exception&) {
        return 1;
    }
}

/**
 * Runs body(i) for i in [0, n) over at most `threads` workers using contiguous
 * blocks. Callers write results into per-index slots, so output never depends
 * on the worker count. The first exception thrown by any worker is rethrown.
 */
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1U, threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    body(i);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace rebalance
