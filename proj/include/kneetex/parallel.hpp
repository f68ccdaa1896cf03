#pragma once

/**
 * @file parallel.hpp
 * @brief Chunked work-stealing loop over an index range.
 *
 * Workers pull fixed-size chunks from an atomic cursor, so the set of items
 * each worker computes varies with scheduling, but items carry their own
 * seeds and write to disjoint slots; results are identical for any thread
 * count. The first exception thrown by any worker is rethrown on the caller.
 */

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kneetex {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

template <typename Fn>
void parallel_for_index(std::int64_t begin, std::int64_t end, int threads, Fn&& fn,
                        std::int64_t chunk = 16) {
  if (end <= begin) return;
  threads = resolve_threads(threads);
  if (threads == 1) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
    return;
  }

  std::atomic<std::int64_t> cursor{begin};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::int64_t lo = cursor.fetch_add(chunk);
      if (lo >= end) return;
      const std::int64_t hi = lo + chunk < end ? lo + chunk : end;
      try {
        for (std::int64_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace kneetex
