#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>

#include <omp.h>

namespace knovo {

// OpenMP loop over [0, n) with dynamic scheduling. The first exception thrown by any
// iteration is rethrown on the calling thread once the loop has finished.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    std::exception_ptr error;
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            fn(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(knovo_parallel_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

inline void set_thread_count(int n) {
    if (n > 0) omp_set_num_threads(n);
}

inline int thread_count() { return omp_get_max_threads(); }

}  // namespace knovo
