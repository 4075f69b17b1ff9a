#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace carpetlab {

/// Hardware concurrency, at least 1.
inline int default_threads() noexcept {
    return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

/// Runs body(row) for every row in [0, rows) on up to `threads` workers.
/// Rows are handed out dynamically; body must only write row-local output.
inline void parallel_rows(int rows, int threads, const std::function<void(int)>& body) {
    threads = std::clamp(threads, 1, std::max(1, rows));
    if (threads == 1) {
        for (int r = 0; r < rows; ++r) body(r);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (int r = next++; r < rows; r = next++) body(r);
        });
    }
}

}  // namespace carpetlab
