#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace uavpheno {

/// Runs fn(begin, end) over contiguous, disjoint slices of [0, n) on up to
/// `threads` workers. With threads <= 1 everything runs on the caller.
/// The first exception thrown by a worker is rethrown on the caller.
inline void parallel_for_rows(int n, int threads, const std::function<void(int, int)>& fn) {
  if (n <= 0) {
    return;
  }
  const int workers = std::clamp(threads, 1, n);
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int begin = w * chunk;
    const int end = std::min(n, begin + chunk);
    if (begin >= end) {
      break;
    }
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

}  // namespace uavpheno
