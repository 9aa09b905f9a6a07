// AVX2 + FMA kernel variant. Compiled with -mavx2 -mfma; only dispatched to
// after a cpuid check, so nothing in this TU may run at static-init time.
#include "tsboot/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace tsboot::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline __m256d abs_pd(__m256d v) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(v, mask);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double out = hsum(acc);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

double triple_dot_avx2(const double* w, const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d wa = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        acc = _mm256_fmadd_pd(wa, _mm256_loadu_pd(b + i), acc);
    }
    double out = hsum(acc);
    for (; i < n; ++i) out += w[i] * a[i] * b[i];
    return out;
}

double sum_sq_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double out = hsum(acc);
    for (; i < n; ++i) out += a[i] * a[i];
    return out;
}

double weighted_sum_sq_avx2(const double* w, const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(w + i), v), v, acc);
    }
    double out = hsum(acc);
    for (; i < n; ++i) out += w[i] * a[i] * a[i];
    return out;
}

double abs_residual_sum_avx2(const double* y, const double* x, double theta, std::size_t n) {
    const __m256d th = _mm256_set1_pd(theta);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fnmadd_pd(th, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, abs_pd(r));
    }
    double out = hsum(acc);
    for (; i < n; ++i) out += std::fabs(y[i] - theta * x[i]);
    return out;
}

double weighted_abs_residual_sum_avx2(const double* w, const double* y, const double* x,
                                      double theta, std::size_t n) {
    const __m256d th = _mm256_set1_pd(theta);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_fnmadd_pd(th, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + i), abs_pd(r), acc);
    }
    double out = hsum(acc);
    for (; i < n; ++i) out += w[i] * std::fabs(y[i] - theta * x[i]);
    return out;
}

const Ops kAvx2Ops = {
    "avx2",
    dot_avx2,
    triple_dot_avx2,
    sum_sq_avx2,
    weighted_sum_sq_avx2,
    abs_residual_sum_avx2,
    weighted_abs_residual_sum_avx2,
};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

}  // namespace tsboot::kernels
