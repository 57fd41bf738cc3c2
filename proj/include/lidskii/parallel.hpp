#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace lidskii {

/// Runs fn(0..count-1) over `threads` workers in static index chunks.
/// Results land in caller-owned slots by index, so the reduction order is
/// independent of the worker count.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::size_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace lidskii
