#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "neocc/core.hpp"

namespace neocc {

namespace detail {
inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> n{0};  // 0 = all hardware threads
    return n;
}
}  // namespace detail

inline void set_num_threads(int n) { detail::thread_count_slot().store(n < 0 ? 0 : n); }

inline int num_threads() {
    int n = detail::thread_count_slot().load();
    if (n <= 0) {
        unsigned hw = std::thread::hardware_concurrency();
        n = hw == 0 ? 1 : static_cast<int>(hw);
    }
    return n;
}

/// Runs f(i) for i in [begin, end) split into contiguous chunks, one worker
/// per chunk. Workers write disjoint outputs, so results do not depend on
/// the thread count.
template <typename F>
void parallel_for(Index begin, Index end, F&& f) {
    const Index count = end - begin;
    if (count <= 0) return;
    int workers = num_threads();
    if (workers > count) workers = static_cast<int>(count);
    if (workers <= 1) {
        for (Index i = begin; i < end; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const Index chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const Index lo = begin + chunk * w;
        const Index hi = lo + chunk < end ? lo + chunk : end;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &f] {
            for (Index i = lo; i < hi; ++i) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace neocc
