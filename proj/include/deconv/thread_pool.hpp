#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "deconv/numeric.hpp"

namespace deconv {

// Runs fn(i) for i in [0, n_tasks) on the requested number of threads.
// Tasks claim indices from a shared counter, so results must be written to
// preallocated per-index slots; that keeps every schedule bit-identical to
// the single-threaded one. The first exception wins and is rethrown on the
// caller's thread.
inline void parallel_for(std::size_t n_tasks, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads < 1) throw ConfigError("thread count must be at least 1");
  if (n_tasks == 0) return;
  if (threads == 1 || n_tasks == 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n_threads = std::min(threads, n_tasks);
  pool.reserve(n_threads);
  for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace deconv
