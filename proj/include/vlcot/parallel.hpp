#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vlcot {

// Process-wide cap on worker threads (CLI --jobs). 0 means "hardware default".
int max_jobs();
void set_max_jobs(int jobs);

namespace detail {
inline int resolved_jobs() {
  int j = max_jobs();
#ifdef _OPENMP
  if (j <= 0) j = omp_get_max_threads();
#else
  if (j <= 0) j = 1;
#endif
  return j;
}
}  // namespace detail

// Parallel map over [0, n). fn(i) must only write state owned by index i;
// results are therefore independent of the schedule. The first exception
// thrown by any worker is rethrown on the calling thread.
template <typename F>
void parallel_for(std::size_t n, F&& fn) {
  if (n == 0) return;
  std::exception_ptr first_error;
  std::mutex error_mutex;
#ifdef _OPENMP
  int jobs = detail::resolved_jobs();
#pragma omp parallel for schedule(dynamic) num_threads(jobs)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
#else
  for (std::size_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
#endif
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vlcot
