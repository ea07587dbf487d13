#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace mixlogit {

/// Worker count: an explicit positive request wins, then MIXLOGIT_THREADS, then 1.
inline std::size_t resolve_threads(int requested = 0)
{
    if (requested > 0) return static_cast<std::size_t>(requested);
    if (const char* env = std::getenv("MIXLOGIT_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

/// Splits [0, n) into contiguous chunks, one per worker, and runs
/// fn(worker, begin, end). Results must be written to disjoint slots; callers
/// reduce in index order so the outcome does not depend on the worker count.
template <typename Fn>
void parallel_chunks(std::size_t n, std::size_t workers, Fn&& fn)
{
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        fn(std::size_t{0}, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n, b + chunk);
        pool.emplace_back([&, w, b, e] {
            try {
                if (b < e) fn(w, b, e);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace mixlogit
