#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace gkit {

/// Resolve a thread-count request: explicit value > 0 wins, then the
/// GKIT_THREADS environment variable, then hardware concurrency.
inline int resolve_threads(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GKIT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace detail {

/// Static contiguous split of [begin, end) over `threads` workers.
/// The callable receives (chunk_begin, chunk_end) and must not touch
/// state shared with other chunks; results must therefore be bitwise
/// independent of the partitioning.
template <class F>
void parallel_chunks(long begin, long end, int threads, F&& body) {
    const long n = end - begin;
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        body(begin, end);
        return;
    }
    const long workers = std::min<long>(threads, n);
    const long base = n / workers;
    const long rem = n % workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    long lo = begin;
    for (long w = 0; w < workers; ++w) {
        const long hi = lo + base + (w < rem ? 1 : 0);
        pool.emplace_back([lo, hi, &body] { body(lo, hi); });
        lo = hi;
    }
    for (auto& t : pool) t.join();
}

} // namespace detail
} // namespace gkit
