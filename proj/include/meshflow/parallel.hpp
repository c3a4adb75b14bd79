#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace meshflow {

// Runs fn over [0, n) split into `threads` contiguous chunks. Chunk k covers
// indices [bounds[k], bounds[k+1]); chunk boundaries depend only on n and the
// thread count, so reductions that merge per-chunk buffers in chunk order are
// reproducible for a fixed thread count.
inline void parallel_for(std::int64_t n, int threads,
                         const std::function<void(std::int64_t begin, std::int64_t end, int chunk)>& fn) {
  if (n <= 0) return;
  if (threads < 1) threads = 1;
  if (threads == 1 || n < 2 * threads) {
    fn(0, n, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::int64_t chunk_size = (n + threads - 1) / threads;
  int chunks = static_cast<int>((n + chunk_size - 1) / chunk_size);
  for (int k = 0; k < chunks; ++k) {
    std::int64_t begin = k * chunk_size;
    std::int64_t end = std::min<std::int64_t>(n, begin + chunk_size);
    pool.emplace_back([&fn, begin, end, k] { fn(begin, end, k); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace meshflow
