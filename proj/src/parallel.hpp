#ifndef RB_PARALLEL_HPP
#define RB_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace rb {

// Resolves a thread-count request: positive values are taken as-is, zero
// falls back to the REPEATER_BUDGET_THREADS environment variable and then to
// the hardware concurrency. Always returns at least 1.
unsigned resolve_threads(int requested);

// Runs fn(chunk_index, begin, end) over [0, n) split into contiguous chunks,
// one per worker. Chunk boundaries depend only on (n, workers), so reductions
// done in chunk-index order are reproducible for a fixed worker count, and
// reductions under a total order are reproducible regardless of it.
void parallel_chunks(std::size_t n, unsigned workers,
                     const std::function<void(unsigned, std::size_t, std::size_t)>& fn);

}  // namespace rb

#endif
