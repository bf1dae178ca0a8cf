#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace pfa {

/// Worker count: PFA_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t thread_count();

namespace detail {
inline thread_local bool in_parallel_region = false;

struct RegionGuard {
    bool saved;
    RegionGuard() : saved(in_parallel_region) { in_parallel_region = true; }
    ~RegionGuard() { in_parallel_region = saved; }
};
}  // namespace detail

/// Calls f(i) for every i in [0, n), spread over thread_count() workers.
/// Nested calls from inside a worker run serially on that worker.
/// Callers write results into slot i and reduce afterwards in index order,
/// which keeps output independent of the thread count. If any call throws,
/// the exception from the lowest index is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = detail::in_parallel_region ? 1 : std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex err_mutex;
    std::size_t err_index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr err;
    auto body = [&] {
        const detail::RegionGuard guard;
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (i < err_index) {
                    err_index = i;
                    err = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace pfa
