#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace xnocs {

// Number of worker threads: hardware concurrency capped by XNOCS_THREADS.
std::size_t thread_budget();

// Runs fn(begin, end) over fixed-size blocks of [first, last). Blocks are
// handed out by an atomic counter, so results must be written to disjoint
// per-index slots (or per-block slots) to stay schedule-independent.
template <typename Fn>
void parallel_for_blocks(std::size_t first, std::size_t last, std::size_t block, Fn&& fn) {
  if (last <= first) return;
  const std::size_t count = last - first;
  const std::size_t nblocks = (count + block - 1) / block;
  const std::size_t nthreads = std::min(thread_budget(), nblocks);
  if (nthreads <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t lo = first + b * block;
      fn(lo, std::min(lo + block, last));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) break;
      const std::size_t lo = first + b * block;
      fn(lo, std::min(lo + block, last));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (std::size_t i = 0; i + 1 < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

template <typename Fn>
void parallel_for(std::size_t first, std::size_t last, Fn&& fn) {
  parallel_for_blocks(first, last, 256, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) fn(i);
  });
}

}  // namespace xnocs
