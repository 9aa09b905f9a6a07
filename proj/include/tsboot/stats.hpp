#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace tsboot::stats {

struct KsReport {
    double d_stat = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// Kolmogorov tail series Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2),
/// truncated once terms drop below 1e-12 and clamped to [0, 1].
double kolmogorov_q(double lambda);

/// Two-sample KS test. D is the exact supremum ECDF distance (merged sweep,
/// ties fully consumed before the gap is read); the p-value is asymptotic:
/// Q(D * sqrt(n1 n2 / (n1 + n2))). With B around 200 the asymptotic p-value
/// is an approximation, which is how it is used throughout.
KsReport ks_two_sample(std::span<const double> a, std::span<const double> b);

struct DensityCurve {
    std::vector<double> grid;     // ascending
    std::vector<double> density;  // nonnegative
    double bandwidth = 0.0;
};

/// Gaussian-kernel density on a uniform grid spanning the sample range plus
/// 4 bandwidths on each side; Silverman bandwidth 1.06 s n^{-1/5}.
DensityCurve kde_gaussian(std::span<const double> sample, std::size_t grid_size = 256);

/// Writes `x,density` rows at 17 significant digits.
void write_density_csv(const DensityCurve& curve, const std::filesystem::path& path);

struct MomentSummary {
    double mean = 0.0;
    double var = 0.0;  // unbiased
    double skew = 0.0;
    double kurt = 0.0;  // non-excess: ~3 under normality
    double q025 = 0.0;
    double median = 0.0;
    double q975 = 0.0;
};

MomentSummary moment_summary(std::span<const double> sample);

/// Order-statistic quantile with linear interpolation at position (n-1)p.
double quantile(std::span<const double> sample, double p);

}  // namespace tsboot::stats
