#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kgof {

/// Runs fn(i) for i in [0, count) on up to n_threads workers.
/// Work items must be independent and write only to their own slots; under
/// that contract results do not depend on the schedule. n_threads <= 1 runs
/// inline. The first exception thrown by a worker is rethrown to the caller.
inline void parallel_for(std::ptrdiff_t count, const std::function<void(std::ptrdiff_t)>& fn,
                         unsigned n_threads = std::thread::hardware_concurrency()) {
  if (count <= 0) return;
  n_threads = std::min<unsigned>(std::max(1u, n_threads), static_cast<unsigned>(count));
  if (n_threads == 1) {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::ptrdiff_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      std::ptrdiff_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace kgof
