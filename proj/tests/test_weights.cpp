#include "tsboot/weights.hpp"

#include "tsboot/rng.hpp"
#include "tsboot/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using tsboot::rng::RngStream;
using tsboot::weights::WeightScheme;

namespace {

// Exact moments of (w_1, w_2) under Mult(n, 1/n, ..., 1/n) by enumerating the
// trinomial joint pmf of the first two cells. Independent of the analytic
// formulas under test.
struct EnumeratedMoments {
    double var = 0.0;
    double cov = 0.0;
    double fourth_central = 0.0;
};

double log_factorial(int k) { return std::lgamma(k + 1.0); }

EnumeratedMoments enumerate_multinomial(int n) {
    const double p = 1.0 / n;
    EnumeratedMoments m;
    for (int a = 0; a <= n; ++a) {
        for (int b = 0; a + b <= n; ++b) {
            const int rest = n - a - b;
            double log_pmf = log_factorial(n) - log_factorial(a) - log_factorial(b) -
                             log_factorial(rest) + (a + b) * std::log(p);
            // (1 - 2p)^rest, with 0^0 = 1 when n = 2 makes 1-2p = 0.
            if (rest > 0) log_pmf += rest * std::log(1.0 - 2.0 * p);
            const double pmf = std::exp(log_pmf);
            const double da = a - 1.0;
            const double db = b - 1.0;
            m.var += pmf * da * da;
            m.cov += pmf * da * db;
            m.fourth_central += pmf * da * da * da * da;
        }
    }
    return m;
}

}  // namespace

TEST_CASE("multinomial analytic moments equal exhaustive enumeration for n = 2..8") {
    for (int n = 2; n <= 8; ++n) {
        CAPTURE(n);
        const auto scheme = WeightScheme::multinomial(n);
        const auto analytic = tsboot::weights::weight_moments(scheme);
        const auto exact = enumerate_multinomial(n);
        CHECK(analytic.mean == 1.0);
        CHECK(std::fabs(analytic.var - exact.var) < 1e-12);
        CHECK(std::fabs(analytic.cov - exact.cov) < 1e-12);
        REQUIRE(analytic.fourth_central.has_value());
        CHECK(std::fabs(*analytic.fourth_central - exact.fourth_central) < 1e-12);
    }
    // The n = 2 spot value that separates the correct fourth-moment formula
    // from its (incorrect) simplification: 0.5, not 0.625.
    const auto m2 = tsboot::weights::weight_moments(WeightScheme::multinomial(2));
    CHECK(*m2.fourth_central == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("multinomial rows are integer, nonnegative, and sum to n") {
    RngStream stream(3);
    const auto scheme = WeightScheme::multinomial(5);
    for (int rep = 0; rep < 100; ++rep) {
        const auto row = tsboot::weights::generate_weights(stream, scheme);
        REQUIRE(row.size() == 5);
        double sum = 0.0;
        for (double w : row) {
            CHECK(w >= 0.0);
            CHECK(w == std::floor(w));
            sum += w;
        }
        CHECK(sum == 5.0);
    }
}

TEST_CASE("empirical multinomial moments match analytics within 4 standard errors") {
    const std::size_t n = 100;
    const std::size_t rows = 10'000;
    const auto scheme = WeightScheme::multinomial(n);
    RngStream stream(17);
    std::vector<double> w1(rows);
    std::vector<double> w2(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = tsboot::weights::generate_weights(stream, scheme);
        w1[r] = row[0];
        w2[r] = row[1];
    }
    double mean1 = 0.0;
    double mean2 = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        mean1 += w1[r];
        mean2 += w2[r];
    }
    mean1 /= rows;
    mean2 /= rows;
    double var = 0.0;
    double cov = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        var += (w1[r] - mean1) * (w1[r] - mean1);
        cov += (w1[r] - mean1) * (w2[r] - mean2);
    }
    var /= rows - 1;
    cov /= rows - 1;

    // SE(var) ~ sqrt((m4 - var^2)/rows); SE(cov) ~ sqrt(var^2 (1+rho^2)/rows).
    const auto analytic = tsboot::weights::weight_moments(scheme);
    const double se_mean = std::sqrt(analytic.var / rows);
    const double se_var =
        std::sqrt((*analytic.fourth_central - analytic.var * analytic.var) / rows);
    const double se_cov = std::sqrt(analytic.var * analytic.var * 1.01 / rows);
    CHECK(std::fabs(mean1 - 1.0) < 4.0 * se_mean);
    CHECK(std::fabs(var - analytic.var) < 4.0 * se_var);    // 0.99 +- ~0.02
    CHECK(std::fabs(cov - analytic.cov) < 4.0 * se_cov);    // -0.01 +- ~0.01

    // Exchangeability proxy: the marginals of w_1 and w_2 agree.
    const auto ks = tsboot::stats::ks_two_sample(w1, w2);
    CHECK(ks.p_value > 0.01);
}

TEST_CASE("iid normal weights have the scheme's moments") {
    const auto scheme = WeightScheme::iid_normal(50, 1.0);
    const auto analytic = tsboot::weights::weight_moments(scheme);
    CHECK(analytic.var == 1.0);
    CHECK(analytic.cov == 0.0);
    CHECK(*analytic.fourth_central == 3.0);

    RngStream stream(23);
    double mean = 0.0;
    double sq = 0.0;
    std::size_t negatives = 0;
    const std::size_t rows = 4000;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = tsboot::weights::generate_weights(stream, scheme);
        for (double w : row) {
            mean += w;
            sq += (w - 1.0) * (w - 1.0);
            if (w < 0.0) ++negatives;
        }
    }
    const double count = static_cast<double>(rows * scheme.n());
    CHECK(mean / count == doctest::Approx(1.0).epsilon(0.01));
    CHECK(sq / count == doctest::Approx(1.0).epsilon(0.02));
    // Normal(1,1) is negative with probability ~15.9%; no truncation happens.
    CHECK(static_cast<double>(negatives) / count == doctest::Approx(0.1587).epsilon(0.05));
}

TEST_CASE("weight rows are reproducible bit for bit") {
    const auto scheme = WeightScheme::multinomial(64);
    auto s1 = RngStream(5).child(2);
    auto s2 = RngStream(5).child(2);
    CHECK(tsboot::weights::generate_weights(s1, scheme) ==
          tsboot::weights::generate_weights(s2, scheme));
}

TEST_CASE("scheme validation") {
    CHECK_THROWS_AS(WeightScheme::multinomial(1), std::invalid_argument);
    CHECK_THROWS_AS(WeightScheme::iid_normal(10, 0.0), std::invalid_argument);
    RngStream stream(1);
    const auto ones = WeightScheme::ones(4);
    CHECK(tsboot::weights::generate_weights(stream, ones) ==
          std::vector<double>{1.0, 1.0, 1.0, 1.0});
    CHECK(tsboot::weights::weight_moments(ones).var == 0.0);
    CHECK(ones.sigma_n_sq() == 1.0);
}
