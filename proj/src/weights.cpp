#include "tsboot/weights.hpp"

#include <cmath>
#include <stdexcept>

namespace tsboot::weights {

WeightScheme WeightScheme::multinomial(std::size_t n) {
    if (n < 2) throw std::invalid_argument("WeightScheme: row length must be >= 2");
    return {WeightKind::multinomial, n, 0.0};
}

WeightScheme WeightScheme::iid_normal(std::size_t n, double sigma_sq) {
    if (n < 2) throw std::invalid_argument("WeightScheme: row length must be >= 2");
    if (!(sigma_sq > 0.0)) throw std::invalid_argument("WeightScheme: sigma_sq must be > 0");
    return {WeightKind::iid_normal, n, sigma_sq};
}

WeightScheme WeightScheme::ones(std::size_t n) {
    if (n < 2) throw std::invalid_argument("WeightScheme: row length must be >= 2");
    return {WeightKind::ones, n, 0.0};
}

std::string WeightScheme::name() const {
    switch (kind_) {
        case WeightKind::multinomial: return "multinomial";
        case WeightKind::iid_normal:
            return "normal(1," + std::to_string(sigma_sq_) + ")";
        case WeightKind::ones: return "ones";
    }
    return "?";
}

double WeightScheme::sigma_n_sq() const {
    switch (kind_) {
        case WeightKind::multinomial: return 1.0 - 1.0 / static_cast<double>(n_);
        case WeightKind::iid_normal: return sigma_sq_;
        case WeightKind::ones: return 1.0;  // nominal scale, see class comment
    }
    return 0.0;
}

double WeightScheme::cov() const {
    switch (kind_) {
        case WeightKind::multinomial: return -1.0 / static_cast<double>(n_);
        case WeightKind::iid_normal: return 0.0;
        case WeightKind::ones: return 0.0;
    }
    return 0.0;
}

std::vector<double> generate_weights(rng::RngStream& stream, const WeightScheme& scheme) {
    const std::size_t n = scheme.n();
    std::vector<double> row(n);
    switch (scheme.kind()) {
        case WeightKind::multinomial: {
            std::vector<std::uint32_t> counts(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                ++counts[stream.uniform_below(n)];
            }
            for (std::size_t i = 0; i < n; ++i) row[i] = static_cast<double>(counts[i]);
            break;
        }
        case WeightKind::iid_normal: {
            const double sd = std::sqrt(scheme.iid_sigma_sq());
            for (auto& w : row) w = 1.0 + sd * stream.normal();
            break;
        }
        case WeightKind::ones: {
            for (auto& w : row) w = 1.0;
            break;
        }
    }
    return row;
}

WeightMoments weight_moments(const WeightScheme& scheme) {
    WeightMoments m;
    // True moments; for `ones` the row is constant, so var is 0 even though
    // the scheme's nominal studentization scale is 1.
    m.var = scheme.kind() == WeightKind::ones ? 0.0 : scheme.sigma_n_sq();
    m.cov = scheme.cov();
    switch (scheme.kind()) {
        case WeightKind::multinomial: {
            const double n = static_cast<double>(scheme.n());
            const double p = 1.0 / n;
            const double q = 1.0 - p;
            m.fourth_central =
                n * (p * q * q * q * q + p * p * p * p * q) + 3.0 * n * (n - 1.0) * p * p * q * q;
            break;
        }
        case WeightKind::iid_normal:
            m.fourth_central = 3.0 * scheme.iid_sigma_sq() * scheme.iid_sigma_sq();
            break;
        case WeightKind::ones:
            m.fourth_central = 0.0;
            break;
    }
    return m;
}

}  // namespace tsboot::weights
