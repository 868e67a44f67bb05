#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mtjsnn {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [begin, end) on up to n_threads workers. Work is
// handed out via an atomic counter; callers must not depend on order.
// The first exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::size_t begin, std::size_t end, int n_threads,
                         const std::function<void(std::size_t)>& fn) {
    const std::size_t n = end > begin ? end - begin : 0;
    const int workers = std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(n_threads)),
                                              std::max<std::size_t>(n, 1));
    if (n == 0) return;
    if (workers <= 1) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{begin};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= end) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(end, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mtjsnn
