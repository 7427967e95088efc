#pragma once

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bobgmm {

/// Execution policy for the draw-level kernels. `serial` is the reference
/// path; both must produce bit-identical results.
enum class Exec { serial, parallel };

/// Calls body(i) for i in [0, n). The body must not throw.
template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
    const auto count = static_cast<std::int64_t>(n);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    } else {
        for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    }
}

inline int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace bobgmm
