#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace hoferlab {

// Worker count: explicit argument > HOFERLAB_JOBS > hardware, capped at 16.
inline int default_jobs() {
    if (const char* env = std::getenv("HOFERLAB_JOBS")) {
        int v = std::atoi(env);
        if (v >= 1) return std::min(v, 64);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return std::clamp<int>(static_cast<int>(hw), 1, 16);
}

// Runs fn(i) for i in [0, n).  Work is split into contiguous chunks; callers
// that reduce must merge per-index results in index order to stay
// deterministic.  The first exception, if any, is rethrown.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (n <= 0) return;
    jobs = std::clamp(jobs, 1, n);
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    int chunk = (n + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
        int lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, w, lo, hi]() {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace hoferlab
