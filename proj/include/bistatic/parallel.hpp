#pragma once

// Minimal deterministic worker pool. Work items are claimed by index from a
// shared atomic counter and every item writes only its own output slot, so
// results are identical for any worker count; only scheduling order varies.

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bistatic {

// Worker-count policy: an explicit nonnegative request wins (0 = hardware);
// otherwise the BISTATIC_THREADS environment variable (0 or unset = hardware).
inline unsigned resolve_worker_count(int requested = -1) {
    long n = requested;
    if (requested < 0) {
        n = 0;
        if (const char* env = std::getenv("BISTATIC_THREADS")) n = std::atol(env);
        if (n < 0) n = 0;
    }
    if (n == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw ? hw : 1;
    }
    return static_cast<unsigned>(n);
}

// Runs fn(i) for i in [0, n). Exceptions from workers are rethrown (first
// one wins) after all workers finish.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int workers = -1) {
    if (n == 0) return;
    const unsigned w = static_cast<unsigned>(
        std::min<std::size_t>(resolve_worker_count(workers), n));
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<bool> failed{false};
    const auto worker = [&]() {
        try {
            for (std::size_t i = next.fetch_add(1); i < n && !failed.load(std::memory_order_relaxed);
                 i = next.fetch_add(1))
                fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed.store(true, std::memory_order_relaxed);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(w - 1);
    for (unsigned t = 1; t < w; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace bistatic
