#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace fliv {

/// Number of worker threads to use when the caller asks for "all cores" (0).
inline int resolve_threads(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

/// Runs body(i) for i in [0, count). With threads <= 1, or when already inside
/// a parallel region, this is a plain serial loop: the reference path that the
/// parallel one must reproduce exactly. Bodies write into per-index slots, so
/// results never depend on the schedule. The first exception (lowest index) is
/// rethrown after the loop completes.
template <typename Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const long n = static_cast<long>(count);
  if (threads <= 1 || omp_in_parallel()) {
    for (long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fliv
