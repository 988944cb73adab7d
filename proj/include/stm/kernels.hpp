#pragma once
#include <cstddef>

// Data-parallel reduction kernels used by the distance-bound and embedding
// inner loops.  Every kernel has a scalar reference implementation and, on
// x86-64 with AVX2, a vectorized variant selected once at startup.  The two
// variants are bit-identical for max/min style reductions (same comparisons,
// reassociation-safe), and the test suite checks equivalence on random data.

namespace stm::kernels {

// max_i |a[i] - b[i]|   (sup-norm distance between two coordinate rows)
double sup_diff(const double* a, const double* b, std::size_t n);

// min_i (a[i] + b[i])   (gluing cross-distance reduction)
double min_plus(const double* a, const double* b, std::size_t n);

// max_i a[i], min_i a[i]
double max_val(const double* a, std::size_t n);
double min_val(const double* a, std::size_t n);

// Name of the active backend: "scalar" or "avx2".
const char* active_backend();

namespace scalar {
double sup_diff(const double* a, const double* b, std::size_t n);
double min_plus(const double* a, const double* b, std::size_t n);
double max_val(const double* a, std::size_t n);
double min_val(const double* a, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
bool supported();
double sup_diff(const double* a, const double* b, std::size_t n);
double min_plus(const double* a, const double* b, std::size_t n);
double max_val(const double* a, std::size_t n);
double min_val(const double* a, std::size_t n);
} // namespace avx2
#endif

} // namespace stm::kernels
