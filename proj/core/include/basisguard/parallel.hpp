#ifndef BASISGUARD_PARALLEL_HPP
#define BASISGUARD_PARALLEL_HPP

#include <functional>
#include <thread>
#include <vector>

namespace basisguard {

inline int hardware_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Runs fn(i) for i in [0, n) on `threads` workers with a static block
// partition. Each index writes only its own outputs, so results do not
// depend on the thread count. threads <= 0 means all cores.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = hardware_threads();
  if (threads > n) threads = n < 1 ? 1 : n;
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    int begin = t * chunk;
    int end = begin + chunk < n ? begin + chunk : n;
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (int i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace basisguard

#endif
