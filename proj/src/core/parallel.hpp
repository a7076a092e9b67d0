#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace pf {

// Static contiguous split of [0, n) across worker threads. Work items must
// write disjoint state so results never depend on the thread count.
inline void parallel_for(size_t n, const std::function<void(size_t, size_t)>& chunk_fn,
                         int jobs = 0) {
  if (n == 0) return;
  size_t workers = jobs > 0 ? static_cast<size_t>(jobs)
                            : std::max<size_t>(1, std::min<size_t>(
                                                      std::thread::hardware_concurrency(), 8));
  workers = std::min(workers, n);
  if (workers <= 1) {
    chunk_fn(0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  size_t per = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    size_t begin = w * per;
    size_t end = std::min(n, begin + per);
    if (begin >= end) break;
    threads.emplace_back(chunk_fn, begin, end);
  }
  for (auto& t : threads) t.join();
}

}  // namespace pf
