#include "stm/kernels.hpp"

#include <cmath>
#include <limits>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#endif

namespace stm::kernels {

namespace scalar {

double sup_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

double min_plus(const double* a, const double* b, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double s = a[i] + b[i];
        if (s < m) m = s;
    }
    return m;
}

double max_val(const double* a, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

double min_val(const double* a, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] < m) m = a[i];
    return m;
}

} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {

bool supported() {
    return __builtin_cpu_supports("avx2") != 0;
}

__attribute__((target("avx2")))
double sup_diff(const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    const __m256d signmask = _mm256_set1_pd(-0.0);
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        __m256d d = _mm256_andnot_pd(signmask, _mm256_sub_pd(va, vb));
        acc = _mm256_max_pd(acc, d);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = lanes[0];
    if (lanes[1] > m) m = lanes[1];
    if (lanes[2] > m) m = lanes[2];
    if (lanes[3] > m) m = lanes[3];
    for (; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

__attribute__((target("avx2")))
double min_plus(const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    __m256d acc = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    for (; i + 4 <= n; i += 4) {
        __m256d s = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_min_pd(acc, s);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = lanes[0];
    if (lanes[1] < m) m = lanes[1];
    if (lanes[2] < m) m = lanes[2];
    if (lanes[3] < m) m = lanes[3];
    for (; i < n; ++i) {
        double s = a[i] + b[i];
        if (s < m) m = s;
    }
    return m;
}

__attribute__((target("avx2")))
double max_val(const double* a, std::size_t n) {
    std::size_t i = 0;
    __m256d acc = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_loadu_pd(a + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = lanes[0];
    for (int k = 1; k < 4; ++k)
        if (lanes[k] > m) m = lanes[k];
    for (; i < n; ++i)
        if (a[i] > m) m = a[i];
    return m;
}

__attribute__((target("avx2")))
double min_val(const double* a, std::size_t n) {
    std::size_t i = 0;
    __m256d acc = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    for (; i + 4 <= n; i += 4)
        acc = _mm256_min_pd(acc, _mm256_loadu_pd(a + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = lanes[0];
    for (int k = 1; k < 4; ++k)
        if (lanes[k] < m) m = lanes[k];
    for (; i < n; ++i)
        if (a[i] < m) m = a[i];
    return m;
}

} // namespace avx2
#endif

namespace {

struct Dispatch {
    double (*sup_diff)(const double*, const double*, std::size_t);
    double (*min_plus)(const double*, const double*, std::size_t);
    double (*max_val)(const double*, std::size_t);
    double (*min_val)(const double*, std::size_t);
    const char* name;
};

Dispatch select() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2::supported()) {
        return {&avx2::sup_diff, &avx2::min_plus, &avx2::max_val, &avx2::min_val, "avx2"};
    }
#endif
    return {&scalar::sup_diff, &scalar::min_plus, &scalar::max_val, &scalar::min_val, "scalar"};
}

const Dispatch& table() {
    static const Dispatch d = select();
    return d;
}

} // namespace

double sup_diff(const double* a, const double* b, std::size_t n) { return table().sup_diff(a, b, n); }
double min_plus(const double* a, const double* b, std::size_t n) { return table().min_plus(a, b, n); }
double max_val(const double* a, std::size_t n) { return table().max_val(a, n); }
double min_val(const double* a, std::size_t n) { return table().min_val(a, n); }
const char* active_backend() { return table().name; }

} // namespace stm::kernels
