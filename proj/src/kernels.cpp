#include "tsboot/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>

namespace tsboot::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double triple_dot_scalar(const double* w, const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * b[i];
    return acc;
}

double sum_sq_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

double weighted_sum_sq_scalar(const double* w, const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * a[i] * a[i];
    return acc;
}

double abs_residual_sum_scalar(const double* y, const double* x, double theta, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(y[i] - theta * x[i]);
    return acc;
}

double weighted_abs_residual_sum_scalar(const double* w, const double* y, const double* x,
                                        double theta, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::fabs(y[i] - theta * x[i]);
    return acc;
}

const Ops kScalarOps = {
    "scalar",
    dot_scalar,
    triple_dot_scalar,
    sum_sq_scalar,
    weighted_sum_sq_scalar,
    abs_residual_sum_scalar,
    weighted_abs_residual_sum_scalar,
};

}  // namespace

#if defined(TSBOOT_BUILD_AVX2)
const Ops& avx2_ops();  // kernels_avx2.cpp
#endif
#if defined(TSBOOT_BUILD_NEON)
const Ops& neon_ops();  // kernels_neon.cpp
#endif

const Ops& scalar_ops() { return kScalarOps; }

const std::vector<const Ops*>& available_ops() {
    static const std::vector<const Ops*> variants = [] {
        std::vector<const Ops*> v;
        v.push_back(&kScalarOps);
#if defined(TSBOOT_BUILD_AVX2)
        if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
            v.push_back(&avx2_ops());
        }
#endif
#if defined(TSBOOT_BUILD_NEON)
        v.push_back(&neon_ops());  // NEON is baseline on aarch64
#endif
        return v;
    }();
    return variants;
}

const Ops& active() {
    static const Ops* chosen = [] {
        const auto& variants = available_ops();
        if (const char* forced = std::getenv("TSBOOT_KERNEL")) {
            for (const Ops* ops : variants) {
                if (std::strcmp(ops->name, forced) == 0) return ops;
            }
            // Unknown or unavailable name: fall back to scalar rather than
            // silently picking a different SIMD variant.
            return variants.front();
        }
        return variants.back();  // widest ISA registers last
    }();
    return *chosen;
}

std::string active_name() { return active().name; }

}  // namespace tsboot::kernels
