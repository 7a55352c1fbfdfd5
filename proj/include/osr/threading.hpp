#ifndef OSR_THREADING_HPP
#define OSR_THREADING_HPP

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace osr {

// Runs fn(chunk_index, begin, end) over fixed-size chunks of [0, n). Chunk
// boundaries depend only on n and chunk_size, so per-chunk results can be
// reduced in chunk order for results independent of the worker count.
inline void parallel_chunks(size_t n, size_t chunk_size, int threads,
                            const std::function<void(size_t, size_t, size_t)>& fn) {
    if (n == 0) return;
    const size_t nchunks = (n + chunk_size - 1) / chunk_size;
    auto run_chunk = [&](size_t ci) {
        const size_t begin = ci * chunk_size;
        const size_t end = std::min(n, begin + chunk_size);
        fn(ci, begin, end);
    };
    if (threads <= 1 || nchunks <= 1) {
        for (size_t ci = 0; ci < nchunks; ++ci) run_chunk(ci);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t ci = next.fetch_add(1);
            if (ci >= nchunks) return;
            run_chunk(ci);
        }
    };
    const size_t nworkers = std::min<size_t>(threads, nchunks);
    std::vector<std::thread> pool;
    pool.reserve(nworkers);
    for (size_t i = 0; i < nworkers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

inline size_t chunk_count(size_t n, size_t chunk_size) { return n == 0 ? 0 : (n + chunk_size - 1) / chunk_size; }

} // namespace osr

#endif
