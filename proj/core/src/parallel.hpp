#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ncbc::detail {

// Runs fn(begin, end) over [0, n) split into contiguous blocks, one per worker.
// Callers write only to disjoint slots, so results do not depend on `workers`.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  const std::size_t count = std::min<std::size_t>(std::max(1u, workers), n);
  if (count <= 1) {
    if (n > 0) fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(count - 1);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](std::size_t begin, std::size_t end) {
    try {
      fn(begin, end);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };
  const std::size_t block = (n + count - 1) / count;
  for (std::size_t w = 1; w < count; ++w) {
    const std::size_t begin = w * block;
    const std::size_t end = std::min(n, begin + block);
    if (begin < end) threads.emplace_back(run, begin, end);
  }
  run(0, std::min(n, block));
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ncbc::detail
