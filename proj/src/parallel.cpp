#include "roomfit/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace roomfit {

namespace {
std::atomic<int> g_threads{0};

// depth of parallel_for_chunks on this thread: nested calls run sequentially
// instead of spawning threads on top of threads
thread_local int tl_parallel_depth = 0;

int effective_threads() {
  const int n = g_threads.load(std::memory_order_relaxed);
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}
}  // namespace

void set_thread_count(int n) { g_threads.store(std::max(0, n), std::memory_order_relaxed); }
int thread_count() { return effective_threads(); }

void parallel_for_chunks(int64_t n, const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  const int workers = std::min<int64_t>(effective_threads(), n);
  if (workers <= 1 || tl_parallel_depth > 0) {
    fn(0, n);
    return;
  }
  struct DepthGuard {
    DepthGuard() { ++tl_parallel_depth; }
    ~DepthGuard() { --tl_parallel_depth; }
  };
  const auto worker = [&fn](int64_t begin, int64_t end) {
    DepthGuard guard;
    fn(begin, end);
  };
  const int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) {
    const int64_t begin = w * chunk;
    const int64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back(worker, begin, end);
  }
  worker(0, std::min(n, chunk));
  for (auto& t : threads) t.join();
}

void parallel_for(int64_t n, const std::function<void(int64_t)>& fn) {
  parallel_for_chunks(n, [&fn](int64_t begin, int64_t end) {
    for (int64_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace roomfit
