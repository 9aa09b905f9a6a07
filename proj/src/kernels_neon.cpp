// NEON kernel variant for aarch64 (baseline there, no runtime probe needed).
#include "tsboot/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace tsboot::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double out = vaddvq_f64(acc);
    for (; i < n; ++i) out += a[i] * b[i];
    return out;
}

double triple_dot_neon(const double* w, const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t wa = vmulq_f64(vld1q_f64(w + i), vld1q_f64(a + i));
        acc = vfmaq_f64(acc, wa, vld1q_f64(b + i));
    }
    double out = vaddvq_f64(acc);
    for (; i < n; ++i) out += w[i] * a[i] * b[i];
    return out;
}

double sum_sq_neon(const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(a + i);
        acc = vfmaq_f64(acc, v, v);
    }
    double out = vaddvq_f64(acc);
    for (; i < n; ++i) out += a[i] * a[i];
    return out;
}

double weighted_sum_sq_neon(const double* w, const double* a, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(a + i);
        acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(w + i), v), v);
    }
    double out = vaddvq_f64(acc);
    for (; i < n; ++i) out += w[i] * a[i] * a[i];
    return out;
}

double abs_residual_sum_neon(const double* y, const double* x, double theta, std::size_t n) {
    const float64x2_t th = vdupq_n_f64(theta);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t r = vfmsq_f64(vld1q_f64(y + i), th, vld1q_f64(x + i));
        acc = vaddq_f64(acc, vabsq_f64(r));
    }
    double out = vaddvq_f64(acc);
    for (; i < n; ++i) out += std::fabs(y[i] - theta * x[i]);
    return out;
}

double weighted_abs_residual_sum_neon(const double* w, const double* y, const double* x,
                                      double theta, std::size_t n) {
    const float64x2_t th = vdupq_n_f64(theta);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t r = vfmsq_f64(vld1q_f64(y + i), th, vld1q_f64(x + i));
        acc = vfmaq_f64(acc, vld1q_f64(w + i), vabsq_f64(r));
    }
    double out = vaddvq_f64(acc);
    for (; i < n; ++i) out += w[i] * std::fabs(y[i] - theta * x[i]);
    return out;
}

const Ops kNeonOps = {
    "neon",
    dot_neon,
    triple_dot_neon,
    sum_sq_neon,
    weighted_sum_sq_neon,
    abs_residual_sum_neon,
    weighted_abs_residual_sum_neon,
};

}  // namespace

const Ops& neon_ops() { return kNeonOps; }

}  // namespace tsboot::kernels
