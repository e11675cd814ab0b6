#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace erlocal {

/// Worker count from ERLOCAL_THREADS, falling back to hardware concurrency.
unsigned default_thread_count();

/// Pins BLAS/LAPACK to a single thread so that parallelism lives at the
/// trial level and numeric results do not depend on the worker count.
void configure_blas_single_threaded();

/// Runs body(i) for i in [0, count) on `threads` workers. Work units are
/// claimed dynamically; callers write results into slot i so the assembled
/// output is independent of completion order. The first exception thrown by
/// any unit is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace erlocal
