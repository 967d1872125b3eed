#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace conetest {

/// Number of workers to use; 0 means one per hardware thread.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Splits [0, count) into contiguous blocks, one per worker, and calls
/// body(begin, end, worker). The first exception thrown by any worker is
/// rethrown after all workers have joined.
template <class Body>
void parallel_for(std::int64_t count, int workers, Body&& body) {
  const int w = static_cast<int>(
      std::max<std::int64_t>(1, std::min<std::int64_t>(resolve_workers(workers), count)));
  if (w == 1) {
    body(std::int64_t{0}, count, 0);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (int t = 0; t < w; ++t) {
    const std::int64_t begin = count * t / w;
    const std::int64_t end = count * (t + 1) / w;
    threads.emplace_back([&, begin, end, t] {
      try {
        body(begin, end, t);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace conetest
