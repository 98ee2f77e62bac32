#pragma once

#include <cstddef>
#include <functional>

// Deterministic parallel map: work is split into a fixed number of chunks and
// partial results are combined in chunk-index order, so the floating-point
// result does not depend on the thread count.

namespace nvdnp {

// Global worker count used by the grid loops (1 = serial). Clamped to >= 1.
void set_thread_count(int n);
int thread_count();

// Runs fn(begin, end, chunk_index) over [0, n) split into a fixed chunk grid.
// Chunks are processed by up to thread_count() workers; fn must only touch
// state owned by its chunk index.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Number of chunks parallel_chunks uses for n items (fixed, thread-independent).
std::size_t chunk_count(std::size_t n);

}  // namespace nvdnp
