#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace homerange::detail {

// Worker cap: HOMERANGE_THREADS wins, otherwise hardware concurrency.
inline int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("HOMERANGE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

// Runs fn(k) for k in [0, n) across workers. Each index is processed exactly
// once; results must be written to disjoint slots so the output does not
// depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int max_workers = 0) {
    int workers = worker_count();
    if (max_workers > 0) workers = std::min(workers, max_workers);
    if (workers <= 1 || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= n) return;
                fn(k);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace homerange::detail
