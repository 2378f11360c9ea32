#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace mcseg {

/// Effective worker count: jobs < 1 means "use the hardware".
inline int resolve_jobs(int jobs) {
    if (jobs >= 1) return jobs;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

// Runs fn(begin, end) over contiguous chunks of [0, count). Chunks are
// write-disjoint by contract; fn must not touch shared mutable state.
template <typename Fn>
void parallel_chunks(std::size_t count, int jobs, Fn&& fn) {
    jobs = resolve_jobs(jobs);
    if (jobs <= 1 || count < 4096) {
        fn(std::size_t{0}, count);
        return;
    }
    const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    const std::size_t chunk = (count + n_chunks - 1) / n_chunks;
    std::vector<std::thread> workers;
    workers.reserve(n_chunks);
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const std::size_t b = c * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b >= e) break;
        workers.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& w : workers) w.join();
}

}  // namespace detail
}  // namespace mcseg
