#pragma once

// Small fork-join helper. Thread budget comes from ONESIDED_THREADS (capped
// by hardware concurrency); results are written to disjoint slots so the
// outcome does not depend on the thread count.

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace onesided {

inline int thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("ONESIDED_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<int>(std::min<long>(v, 256));
    }
    return static_cast<int>(hw);
}

/// Runs fn(begin, end) over [0, n) split into contiguous chunks.
/// threads <= 0 means "use the budget"; threads == 1 runs inline.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
    if (threads <= 0) threads = thread_budget();
    if (threads == 1 || n < 2048) {
        fn(std::size_t{0}, n);
        return;
    }
    std::size_t nt = std::min<std::size_t>(threads, n);
    std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        std::size_t b = i * chunk;
        std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : pool) t.join();
}

} // namespace onesided
