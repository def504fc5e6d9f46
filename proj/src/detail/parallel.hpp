#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace factlab::detail {

// Splits [0, total) into `threads` contiguous chunks and runs
// fn(chunk_index, begin, end) concurrently. Chunk boundaries depend only on
// (total, threads), so callers can merge per-chunk results in chunk order and
// get output independent of scheduling.
inline void parallel_chunks(std::uint64_t total, int threads,
                            const std::function<void(int, std::uint64_t, std::uint64_t)>& fn) {
  if (total == 0) return;
  std::uint64_t want = threads < 1 ? 1 : static_cast<std::uint64_t>(threads);
  int n = static_cast<int>(std::min<std::uint64_t>(want, total));
  if (n <= 1) {
    fn(0, 0, total);
    return;
  }
  std::uint64_t base = total / n;
  std::uint64_t rem = total % n;
  std::vector<std::thread> pool;
  pool.reserve(n - 1);
  std::vector<std::exception_ptr> errors(n);
  std::uint64_t begin = 0;
  for (int i = 0; i < n; ++i) {
    std::uint64_t len = base + (static_cast<std::uint64_t>(i) < rem ? 1 : 0);
    std::uint64_t end = begin + len;
    auto task = [&fn, &errors, i, begin, end] {
      try {
        fn(i, begin, end);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    };
    if (i < n - 1)
      pool.emplace_back(task);
    else
      task();  // run the last chunk on the calling thread
    begin = end;
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace factlab::detail
