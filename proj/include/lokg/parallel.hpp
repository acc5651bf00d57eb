#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace lokg {

/// Worker count for a `jobs` setting: 0 means all available cores.
inline std::size_t resolve_jobs(std::size_t jobs) noexcept {
    if (jobs > 0) return jobs;
    const auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Calls fn(chunk_begin, chunk_end) for fixed-size chunks of [0, n). Chunk
/// boundaries depend only on n and chunk, never on the worker count, so
/// callers that reduce per-chunk results in chunk order get identical output
/// for any `jobs`. The first exception (in chunk order) is rethrown.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t chunk, std::size_t jobs, Fn&& fn) {
    if (n == 0) return;
    chunk = std::max<std::size_t>(chunk, 1);
    const std::size_t chunks = (n + chunk - 1) / chunk;
    const std::size_t workers = std::min(resolve_jobs(jobs), chunks);
    std::vector<std::exception_ptr> errors(chunks);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
            try {
                fn(c * chunk, std::min(n, (c + 1) * chunk));
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace lokg
