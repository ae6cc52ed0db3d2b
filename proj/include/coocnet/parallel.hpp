#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace coocnet {

/// Runs body(index, worker) for every index in [0, count) on `workers`
/// threads. Indices are handed out dynamically, so callers must write results
/// by index to stay order-preserving. The first exception thrown by any body
/// is rethrown after all threads have joined.
template <typename Body>
void parallel_for(std::size_t count, int workers, Body&& body) {
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                      std::max<std::size_t>(count, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i, 0);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i, static_cast<int>(w));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Splits [0, count) into `parts` contiguous ranges; part k is
/// [bounds[k], bounds[k+1]).
inline std::vector<std::size_t> contiguous_bounds(std::size_t count, std::size_t parts) {
  parts = std::max<std::size_t>(parts, 1);
  std::vector<std::size_t> bounds(parts + 1);
  for (std::size_t k = 0; k <= parts; ++k) bounds[k] = count * k / parts;
  return bounds;
}

}  // namespace coocnet
