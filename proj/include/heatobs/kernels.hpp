#pragma once

#include <cstddef>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace heatobs {

// Data-parallel primitives used by the quadrature and lattice-sum loops.
// Each has a serial reference twin; tests compare the two and the benchmark
// tool times them against each other.

template <typename F>
double serial_sum(std::int64_t n, F&& f) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) s += f(i);
    return s;
}

template <typename F>
double parallel_sum(std::int64_t n, F&& f) {
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) s += f(i);
    return s;
}

template <typename F>
void serial_for(std::int64_t n, F&& f) {
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

template <typename F>
void parallel_for(std::int64_t n, F&& f) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) f(i);
}

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace heatobs
