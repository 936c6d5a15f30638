#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace sdmm::detail {

// Worker cap: SDMM_THREADS when set, otherwise the machine core count.
inline unsigned worker_limit() {
    if (const char* env = std::getenv("SDMM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Runs f(i) for i in [0, n) across worker threads with static striding.
// Each index must write only to its own output slot.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const unsigned workers = std::min<std::size_t>(worker_limit(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) f(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace sdmm::detail
