#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace transolve {

// Worker count, capped by the TRANSOLVE_THREADS environment variable.
inline int WorkerThreads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("TRANSOLVE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

// Runs fn(i) for i in [0, n) over contiguous chunks. fn must only write to
// per-index state.
template <typename Fn>
void ParallelFor(int n, Fn&& fn) {
  const int workers = std::min(WorkerThreads(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
    const int end =
        static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([begin, end, &fn] {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace transolve
