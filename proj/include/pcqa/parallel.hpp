#pragma once

#include <cstddef>
#include <functional>

namespace pcqa {

// Worker count used by parallel_for: hardware concurrency, capped by the
// PCQA_THREADS environment variable when set (minimum 1).
int worker_count();

// Runs fn(i) for every i in [0, n), split into contiguous chunks across the
// workers. fn must only write to storage owned by index i, so the result is
// identical for any thread count. Exceptions are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pcqa
