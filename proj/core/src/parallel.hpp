#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace lux::detail {

// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency).  Work is handed out dynamically; fn must be thread safe.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    int k = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    k = std::max(1, std::min(k, n));
    if (k == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (int w = 0; w < k; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace lux::detail
