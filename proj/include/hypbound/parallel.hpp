#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace hypbound {

// Resolves a requested worker count: 0 means "use HYPBOUND_THREADS, else 1".
unsigned resolve_threads(unsigned requested);

// Runs body(chunk_index, begin, end) over `threads` contiguous chunks of
// [0, n). Chunk boundaries depend only on n and the chunk count, so callers
// that merge per-chunk results in chunk order are deterministic.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (chunks == 1) {
    body(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    pool.emplace_back([&body, c, begin, end] { body(c, begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hypbound
