#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace capsim {

// Worker cap shared by all parallel loops; the CLI sets it from --threads.
inline std::atomic<int>& max_threads_ref() {
    static std::atomic<int> n{0}; // 0 = use hardware concurrency
    return n;
}

inline void set_max_threads(int n) { max_threads_ref().store(n); }

inline int effective_threads(int work_items) {
    int n = max_threads_ref().load();
    if (n <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        n = hw == 0 ? 1 : static_cast<int>(hw);
    }
    if (n > work_items) n = work_items;
    return n < 1 ? 1 : n;
}

// Runs f(i) for i in [0, n). Work is split into contiguous chunks; callers
// write results into per-index slots and reduce sequentially afterwards, so
// outputs do not depend on the thread count.
template <typename F>
void parallel_for(int n, F&& f) {
    if (n <= 0) return;
    const int threads = effective_threads(n);
    if (threads == 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * chunk;
        const int hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (int i = lo; i < hi; ++i) f(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace capsim
