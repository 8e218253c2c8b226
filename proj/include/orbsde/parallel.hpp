#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace orbsde {

// Worker count: ORBSDE_THREADS when set, otherwise the hardware count.
inline int thread_count() {
    if (const char* env = std::getenv("ORBSDE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Chunked parallel loop over [0, n).  Only used for index-disjoint writes, so
// results do not depend on the thread count; reductions stay sequential.
inline void parallel_for(long n, const std::function<void(long, long)>& body) {
    const int workers = thread_count();
    if (workers <= 1 || n < 4096) {
        body(0, n);
        return;
    }
    const long chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (long begin = 0; begin < n; begin += chunk) {
        const long end = std::min(n, begin + chunk);
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace orbsde
