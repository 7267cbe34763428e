#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace relcoh {

/// Resolves a requested worker count; 0 means "one per hardware thread".
inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Splits [0, n) into `workers` contiguous chunks and runs
/// fn(chunk_index, begin, end) on each. The chunk boundaries depend only on
/// n and the chunk count, so callers that merge per-chunk results in chunk
/// order get output independent of scheduling. The first exception thrown
/// by any chunk is rethrown on the calling thread.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(resolve_workers(workers), n));
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    threads.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::size_t chunk_count(std::size_t n, unsigned workers) {
  return std::max<std::size_t>(1, std::min<std::size_t>(resolve_workers(workers), n));
}

}  // namespace relcoh
