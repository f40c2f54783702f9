#pragma once
// Statically partitioned parallel loop. Each worker owns a contiguous index
// range, so any per-worker accumulation reduced in worker order is bitwise
// reproducible for a fixed thread count.

#include <cstddef>
#include <thread>
#include <vector>

namespace qfdi::par {

inline unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// fn(worker_index, begin, end)
template <typename Fn>
void for_ranges(std::size_t n, unsigned threads, Fn&& fn) {
    const unsigned t = resolve_threads(threads);
    if (t <= 1 || n <= 1) {
        fn(0u, std::size_t{0}, n);
        return;
    }
    const std::size_t per = (n + t - 1) / t;
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = std::min(n, w * per);
        const std::size_t hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&fn, w, lo, hi] { fn(w, lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace qfdi::par
