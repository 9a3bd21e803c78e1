#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

#include "topo/types.hpp"

namespace topo {

// Number of worker threads: hardware concurrency, capped by the THREADS
// environment variable when set.
inline int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

// Chunked parallel loop over [0, n). The callable must only write to
// disjoint locations per index; results are then independent of the
// thread count.
template <class F>
void parallel_for(Index n, F&& f) {
  const int workers = n < 2048 ? 1 : worker_count();
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const Index chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Index lo = w * chunk;
    const Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (Index i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace topo
