#pragma once

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ahmm {

// Parallelism cap: ACTIVITY_HMM_THREADS env var, else hardware concurrency.
inline unsigned max_threads() {
  if (const char* env = std::getenv("ACTIVITY_HMM_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

// Runs body(i) for i in [0, n). Work items must be independent; results
// are written by index so the outcome does not depend on thread count.
template <typename F>
void parallel_for(std::size_t n, F&& body) {
  const unsigned nthreads = std::min<std::size_t>(max_threads(), n);
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace ahmm
