#pragma once

#include <cstddef>
#include <functional>

namespace gsvq {

// Current thread cap (>= 1). Defaults to GSVQ_THREADS or hardware concurrency.
int max_threads();

// n <= 0 restores the default cap.
void set_max_threads(int n);

inline std::size_t num_chunks(std::size_t n, std::size_t chunk_size) {
    return chunk_size == 0 ? 0 : (n + chunk_size - 1) / chunk_size;
}

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on n and chunk_size, never on the thread cap,
// so any reduction that merges per-chunk results in chunk order is bit-stable
// across thread counts.
void parallel_for_chunks(std::size_t n, std::size_t chunk_size,
                         const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

} // namespace gsvq
