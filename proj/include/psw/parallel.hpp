#pragma once

#include <cstdint>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace psw {

/// Number of worker threads a request resolves to: 0 means "all available".
inline int effective_threads(int requested) {
#ifdef _OPENMP
    if (requested <= 0) return omp_get_max_threads();
    return requested;
#else
    (void)requested;
    return 1;
#endif
}

/// Parallel loop over [0, n). The body must write results into per-index
/// slots only; aggregation happens after the loop so the outcome does not
/// depend on scheduling. Exceptions must not escape the body.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& body) {
#ifdef _OPENMP
    const int nt = effective_threads(threads);
#pragma omp parallel for schedule(dynamic) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) {
        body(i);
    }
#else
    (void)threads;
    for (std::int64_t i = 0; i < n; ++i) {
        body(i);
    }
#endif
}

}  // namespace psw
