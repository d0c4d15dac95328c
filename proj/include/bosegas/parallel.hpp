#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace bosegas {

// Worker cap shared by all parallel loops (set from the CLI --threads flag).
inline int &max_threads() {
  static int n = static_cast<int>(std::thread::hardware_concurrency());
  return n;
}

// Deterministic parallel reduction: the index range is cut into fixed-size
// blocks, each block is reduced sequentially, and block results are combined
// in ascending block order.  The result is bit-identical for any thread count.
template <class BlockFn>
inline double parallel_block_sum(std::size_t n, std::size_t block_size,
                                 const BlockFn &block_sum) {
  if (n == 0)
    return 0.0;
  block_size = std::max<std::size_t>(1, block_size);
  const std::size_t nblocks = (n + block_size - 1) / block_size;
  std::vector<double> partial(nblocks, 0.0);

  int nthreads = std::max(1, max_threads());
  nthreads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(nthreads), nblocks));

  if (nthreads == 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t lo = b * block_size;
      const std::size_t hi = std::min(n, lo + block_size);
      partial[b] = block_sum(lo, hi);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= nblocks)
          return;
        const std::size_t lo = b * block_size;
        const std::size_t hi = std::min(n, lo + block_size);
        partial[b] = block_sum(lo, hi);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back(work);
    for (auto &th : pool)
      th.join();
  }

  double total = 0.0;
  for (double p : partial)
    total += p;
  return total;
}

// Deterministic parallel map over [0, n): each index is written exactly once.
template <class Fn>
inline void parallel_for(std::size_t n, const Fn &fn) {
  int nthreads = std::max(1, max_threads());
  nthreads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(nthreads), n));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n)
        return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t)
    pool.emplace_back(work);
  for (auto &th : pool)
    th.join();
}

} // namespace bosegas
