#pragma once

#include <cstdint>
#include <functional>

namespace roomfit {

// Process-wide worker count used by parallel_for; 0 restores the hardware
// default. Runs are deterministic for any setting because callers write
// results into per-index slots and reduce sequentially.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into contiguous chunks, one per worker.
void parallel_for_chunks(int64_t n, const std::function<void(int64_t, int64_t)>& fn);
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace roomfit
