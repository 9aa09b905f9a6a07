#include "tsboot/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace tsboot::stats {

double kolmogorov_q(double lambda) {
    // Below 0.2 the tail mass 1 - Q is under 1e-12, far inside the series
    // truncation error, while the alternating series itself would need ~1/x
    // terms; return the plateau directly.
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100'000; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("ks_two_sample: both samples must be non-empty");
    }
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    // Once one sample is exhausted the gap only shrinks back toward the tail
    // value already recorded, so the sweep can stop here.

    KsReport report;
    report.d_stat = d;
    report.n1 = sa.size();
    report.n2 = sb.size();
    report.p_value = kolmogorov_q(d * std::sqrt(na * nb / (na + nb)));
    return report;
}

DensityCurve kde_gaussian(std::span<const double> sample, std::size_t grid_size) {
    if (sample.size() < 2) throw std::invalid_argument("kde_gaussian: need at least 2 points");
    if (grid_size < 2) throw std::invalid_argument("kde_gaussian: grid_size must be >= 2");

    const double n = static_cast<double>(sample.size());
    double mean = 0.0;
    for (double x : sample) mean += x;
    mean /= n;
    double var = 0.0;
    double lo = sample[0];
    double hi = sample[0];
    for (double x : sample) {
        var += (x - mean) * (x - mean);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    var /= (n - 1.0);
    if (!(var > 0.0)) throw std::invalid_argument("kde_gaussian: zero sample variance");

    DensityCurve curve;
    curve.bandwidth = 1.06 * std::sqrt(var) * std::pow(n, -0.2);
    const double left = lo - 4.0 * curve.bandwidth;
    const double right = hi + 4.0 * curve.bandwidth;
    const double step = (right - left) / static_cast<double>(grid_size - 1);

    curve.grid.resize(grid_size);
    curve.density.resize(grid_size);
    const double norm = 1.0 / (n * curve.bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double x = left + step * static_cast<double>(g);
        double acc = 0.0;
        for (double xi : sample) {
            const double u = (x - xi) / curve.bandwidth;
            acc += std::exp(-0.5 * u * u);
        }
        curve.grid[g] = x;
        curve.density[g] = norm * acc;
    }
    return curve;
}

void write_density_csv(const DensityCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "x,density\n";
    char buf[128];
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", curve.grid[i], curve.density[i]);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

double quantile(std::span<const double> sample, double p) {
    if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

MomentSummary moment_summary(std::span<const double> sample) {
    if (sample.size() < 2) throw std::invalid_argument("moment_summary: need at least 2 points");
    const double n = static_cast<double>(sample.size());
    MomentSummary s;
    for (double x : sample) s.mean += x;
    s.mean /= n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double x : sample) {
        const double d = x - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    s.var = m2 / (n - 1.0);
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 > 0.0) {
        s.skew = m3 / std::pow(m2, 1.5);
        s.kurt = m4 / (m2 * m2);
    }
    s.q025 = quantile(sample, 0.025);
    s.median = quantile(sample, 0.5);
    s.q975 = quantile(sample, 0.975);
    return s;
}

}  // namespace tsboot::stats
