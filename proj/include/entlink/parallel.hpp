#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>

namespace entlink {

// OpenMP loop over [0, n). The first exception thrown by any iteration is
// rethrown on the calling thread after the loop joins.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace entlink
