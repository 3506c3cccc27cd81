#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace parxad {

/// Resolves a requested thread count: <=0 means "all hardware threads".
inline int effective_threads(int requested) {
#ifdef _OPENMP
    if (requested <= 0) return omp_get_max_threads();
    return requested;
#else
    (void)requested;
    return 1;
#endif
}

/// Data-parallel loop over [0, n). threads <= 1 runs the plain serial loop —
/// that path is the reference the parallel one is tested against. Each
/// iteration must write only to its own slot; results are then identical for
/// any thread count.
template <class Body>
void parallel_for(std::int64_t n, int threads, Body&& body) {
    if (n <= 0) return;
    threads = effective_threads(threads);
    if (threads <= 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) body(i);
#else
    for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

} // namespace parxad
