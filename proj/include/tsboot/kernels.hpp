#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tsboot::kernels {

/// Vectorizable reduction kernels shared by the estimators and the bootstrap
/// engines. Each entry is a free function pointer so a variant is a plain
/// table; the scalar table is the reference semantics, SIMD tables must agree
/// with it up to floating-point reassociation.
struct Ops {
    const char* name;

    /// sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    /// sum_i w[i] * a[i] * b[i]
    double (*triple_dot)(const double* w, const double* a, const double* b, std::size_t n);
    /// sum_i a[i]^2
    double (*sum_sq)(const double* a, std::size_t n);
    /// sum_i w[i] * a[i]^2
    double (*weighted_sum_sq)(const double* w, const double* a, std::size_t n);
    /// sum_i |y[i] - theta * x[i]|
    double (*abs_residual_sum)(const double* y, const double* x, double theta, std::size_t n);
    /// sum_i w[i] * |y[i] - theta * x[i]|
    double (*weighted_abs_residual_sum)(const double* w, const double* y, const double* x,
                                        double theta, std::size_t n);
};

/// Reference implementation (plain loops, baseline ISA).
const Ops& scalar_ops();

/// All variants compiled into this binary, scalar first.
const std::vector<const Ops*>& available_ops();

/// The variant selected for this process: the widest ISA the CPU supports,
/// unless the TSBOOT_KERNEL environment variable names a specific one.
/// The choice is made once and never changes afterwards.
const Ops& active();

/// Name of the active variant (for manifests and --version output).
std::string active_name();

}  // namespace tsboot::kernels
