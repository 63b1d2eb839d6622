#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace cfl {

/// Splits [0, n) into contiguous chunks, applies `fn(lo, hi)` to each, and
/// returns the per-chunk results in chunk order.  With jobs <= 1 (or a
/// small range) everything runs on the calling thread.  Results depend
/// only on the chunk boundaries, so any reduction that is order-aware at
/// merge time stays deterministic regardless of scheduling.
template <typename Fn>
auto parallel_map_chunks(std::size_t n, unsigned jobs, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{0}, std::size_t{0}))> {
  using Result = decltype(fn(std::size_t{0}, std::size_t{0}));
  if (jobs <= 1 || n < 2) {
    std::vector<Result> out;
    out.push_back(fn(0, n));
    return out;
  }
  const std::size_t chunks = std::min<std::size_t>(jobs, n);
  std::vector<Result> out(chunks);
  std::vector<std::thread> workers;
  workers.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t lo = n * c / chunks;
    const std::size_t hi = n * (c + 1) / chunks;
    workers.emplace_back([&, c, lo, hi] { out[c] = fn(lo, hi); });
  }
  for (std::thread& t : workers) t.join();
  return out;
}

}  // namespace cfl
