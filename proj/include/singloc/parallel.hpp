#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace singloc {

/// Runs fn(i) for i in [0, count). With threads > 1 the index range is
/// dealt out in chunks; results must be written to per-index slots so the
/// outcome does not depend on the schedule. Exceptions are collected and
/// the first one rethrown on the caller's thread.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace singloc
