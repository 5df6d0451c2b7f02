#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <string_view>
#include <thread>
#include <vector>

namespace fnmcop {

/// FNM_THREADS if set to a positive integer, else the hardware concurrency.
int thread_count();

namespace detail {
inline thread_local bool in_parallel_region = false;
}

/// Runs f(i) for i in [0, n) on up to thread_count() threads. Results must be
/// written to per-index slots by f; the first exception by index is rethrown.
/// Nested calls from a worker thread run serially.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers =
      detail::in_parallel_region ? 1 : std::min<std::size_t>(n, static_cast<std::size_t>(thread_count()));
  std::vector<std::exception_ptr> errors(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        detail::in_parallel_region = true;
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            f(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x);
/// Task seed from a base seed and a textual task key (FNV-1a, then mixed).
std::uint64_t derive_seed(std::uint64_t base, std::string_view key);

}  // namespace fnmcop
