#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace agesched {

/// Runs f(i) for i in [0, n) on up to `threads` workers. Blocks until all
/// items finish; the first exception thrown by any item is rethrown.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& f) {
    if (n <= 0) {
        return;
    }
    const int workers = std::max(1, std::min(threads, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back(body);
    }
    for (auto& th : pool) {
        th.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace agesched
