#pragma once

#include "tsboot/rng.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tsboot::weights {

enum class WeightKind {
    multinomial,  // Mult(n, 1/n, ..., 1/n): the paired-bootstrap weights
    iid_normal,   // independent Normal(1, sigma_sq)
    ones,         // constant 1 row; degenerate scheme for identity tests
};

/// An exchangeable bootstrap-weight scheme of row length n together with the
/// analytic moments used to studentize pivots.
///
/// Both production schemes satisfy the mean-1 / bounded-variance / O(1/n)
/// covariance conditions the bootstrap CLT needs:
///   multinomial: var = 1 - 1/n, cov = -1/n
///   iid normal:  var = sigma_sq, cov = 0
/// The `ones` scheme exists so identity-weight degeneracy is testable; its
/// nominal studentization scale is 1, making the pivot exactly zero.
class WeightScheme {
public:
    static WeightScheme multinomial(std::size_t n);
    static WeightScheme iid_normal(std::size_t n, double sigma_sq = 1.0);
    static WeightScheme ones(std::size_t n);

    WeightKind kind() const { return kind_; }
    std::size_t n() const { return n_; }
    double iid_sigma_sq() const { return sigma_sq_; }
    std::string name() const;

    /// Row variance sigma_n^2 used in the studentized pivot.
    double sigma_n_sq() const;
    /// Cov(w_1, w_2).
    double cov() const;

    /// Rows of this kind never contain negative entries.
    bool nonnegative() const { return kind_ != WeightKind::iid_normal; }

private:
    WeightScheme(WeightKind kind, std::size_t n, double sigma_sq)
        : kind_(kind), n_(n), sigma_sq_(sigma_sq) {}
    WeightKind kind_;
    std::size_t n_;
    double sigma_sq_;
};

struct WeightMoments {
    double mean = 1.0;
    double var = 0.0;
    double cov = 0.0;
    /// Fourth central moment of w_1; absent when the scheme does not pin it
    /// down analytically.
    std::optional<double> fourth_central;
};

/// One exchangeable weight row. Multinomial rows are nonnegative integers
/// summing to n (generated by tallying n uniform category picks); iid normal
/// rows are independent Normal(1, sigma_sq) draws and may be negative.
std::vector<double> generate_weights(rng::RngStream& stream, const WeightScheme& scheme);

/// Analytic moments of the scheme.
///
/// The multinomial fourth central moment uses
///   n (p q^4 + p^4 q) + 3 n (n-1) p^2 q^2,   p = 1/n, q = 1 - p,
/// which matches exact enumeration (0.5 at n = 2). A commonly quoted
/// closed-form simplification of this quantity, (1 - 1/n)(4 - 9/n + 6/n^2 +
/// 2/n^3), does not: it gives 0.625 at n = 2, so it is not used here.
WeightMoments weight_moments(const WeightScheme& scheme);

}  // namespace tsboot::weights
