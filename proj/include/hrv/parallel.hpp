#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace hrv {

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
    return (n + chunk_size - 1) / chunk_size;
}

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on (n, chunk_size); workers pull chunks from an
// atomic counter. Callers store per-chunk results by index and reduce them in
// index order, so Monte Carlo output is byte-identical for any worker count.
template <class Fn>
void run_chunked(std::size_t n, std::size_t chunk_size, int workers, Fn&& fn) {
    if (n == 0) return;
    const std::size_t n_chunks = chunk_count(n, chunk_size);
    workers = resolve_workers(workers);
    if (workers == 1 || n_chunks == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        }
    };
    std::vector<std::thread> pool;
    const std::size_t n_threads = std::min<std::size_t>(workers, n_chunks);
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(body);
    for (auto& th : pool) th.join();
}

}  // namespace hrv
