#pragma once

// OpenMP loop helper that carries exceptions out of the parallel region.

#include <cstddef>
#include <exception>
#include <mutex>

namespace bl {

// Applies BL_THREADS (if set) as the OpenMP thread cap. Called by the CLI and
// the benchmark; library code never changes the thread count on its own.
void apply_thread_cap();
int max_threads();

template <class F>
void parallel_for(std::ptrdiff_t n, F&& body) {
  std::exception_ptr first;
  std::mutex guard;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace bl
