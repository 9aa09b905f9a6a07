#include "tsboot/processes.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace tsboot::processes;
using tsboot::rng::ErrorDist;
using tsboot::rng::RngStream;

TEST_CASE("noise-free AR(1) is the exact geometric recursion") {
    AR1Spec spec{0.5, 0.0, ErrorDist::standard_normal()};
    const auto series = simulate_ar1(spec, 20, RngStream(1));
    const double x0 = series.values[0];
    for (std::size_t t = 0; t < series.size(); ++t) {
        CHECK(series.values[t] == doctest::Approx(x0 * std::pow(0.5, t)).epsilon(1e-14));
    }
}

TEST_CASE("AR(1) stationary variance and lag-1 autocorrelation") {
    AR1Spec spec{0.5, 1.0, ErrorDist::standard_normal()};
    const auto series = simulate_ar1(spec, 100'000, RngStream(12));
    double mean = 0.0;
    for (double x : series.values) mean += x;
    mean /= static_cast<double>(series.size());
    double var = 0.0;
    double lag1 = 0.0;
    for (std::size_t t = 0; t < series.size(); ++t) {
        var += (series.values[t] - mean) * (series.values[t] - mean);
        if (t > 0) lag1 += (series.values[t] - mean) * (series.values[t - 1] - mean);
    }
    var /= static_cast<double>(series.size());
    lag1 /= static_cast<double>(series.size() - 1);
    CHECK(var == doctest::Approx(4.0 / 3.0).epsilon(0.05 / (4.0 / 3.0)));
    // rho(1) = theta for AR(1).
    CHECK(lag1 / var == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("non-stationary theta is rejected") {
    CHECK_THROWS_AS(simulate_ar1({1.0, 1.0, ErrorDist::standard_normal()}, 10, RngStream(1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        simulate_hetero_ar1({-1.2, TauSchedule::constant(1.0), ErrorDist::standard_normal()}, 10,
                            RngStream(1)),
        std::invalid_argument);
}

TEST_CASE("constant-schedule hetero AR(1) is bit-identical to plain AR(1)") {
    AR1Spec ar{0.4, 2.0, ErrorDist::double_exponential_unit()};
    HeteroAR1Spec hetero{0.4, TauSchedule::constant(2.0), ErrorDist::double_exponential_unit()};
    const auto a = simulate_ar1(ar, 500, RngStream(9).child(1));
    const auto b = simulate_hetero_ar1(hetero, 500, RngStream(9).child(1));
    CHECK(a.values == b.values);

    // A degenerate two-period schedule is the unit-scale model.
    HeteroAR1Spec flat{0.4, TauSchedule::two_period_var(1.0, 1.0),
                       ErrorDist::double_exponential_unit()};
    const auto c = simulate_ar1({0.4, 1.0, ErrorDist::double_exponential_unit()}, 200,
                                RngStream(10));
    const auto d = simulate_hetero_ar1(flat, 200, RngStream(10));
    CHECK(c.values == d.values);
}

TEST_CASE("two-period schedule puts sigma1 on odd indices") {
    const auto tau = TauSchedule::two_period_var(1.0, 4.0);
    CHECK(tau.tau(1) == 1.0);
    CHECK(tau.tau(2) == 2.0);
    CHECK(tau.tau(3) == 1.0);

    // Variance of Z_t at odd t over replicates equals sigma1^2.
    HeteroAR1Spec spec{0.5, tau, ErrorDist::standard_normal()};
    RngStream root(31);
    const std::size_t reps = 100'000;
    double sum_sq_odd = 0.0;
    double sum_sq_even = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto s = simulate_hetero_ar1(spec, 4, root.child(r));
        const double z1 = s.values[1] - 0.5 * s.values[0];
        const double z2 = s.values[2] - 0.5 * s.values[1];
        sum_sq_odd += z1 * z1;
        sum_sq_even += z2 * z2;
    }
    // SE of a chi-square mean: sqrt(2/reps)*sigma^2 -> 3 SE bounds.
    CHECK(std::fabs(sum_sq_odd / reps - 1.0) < 3.0 * std::sqrt(2.0 / reps));
    CHECK(std::fabs(sum_sq_even / reps - 4.0) < 3.0 * 4.0 * std::sqrt(2.0 / reps));
}

TEST_CASE("explicit schedules cover exactly their horizon") {
    const auto tau = TauSchedule::explicit_values({1.0, 2.0, 3.0});
    CHECK(tau.tau(2) == 2.0);
    CHECK(tau.horizon() == 3);
    CHECK_THROWS_AS(tau.tau(4), std::out_of_range);
    CHECK_THROWS_AS(TauSchedule::explicit_values({1.0, -1.0}), std::invalid_argument);

    HeteroAR1Spec spec{0.5, tau, ErrorDist::standard_normal()};
    CHECK(simulate_hetero_ar1(spec, 4, RngStream(1)).size() == 4);
    CHECK_THROWS_AS(simulate_hetero_ar1(spec, 10, RngStream(1)), std::invalid_argument);
}

TEST_CASE("power schedule evaluates tau_t^2 = c t^alpha") {
    const auto tau = TauSchedule::power(2.0, 0.5);
    CHECK(tau.tau(1) == doctest::Approx(std::sqrt(2.0)));
    CHECK(tau.tau(4) == doctest::Approx(std::sqrt(2.0 * 2.0)));
}

TEST_CASE("ARCH with b = 0 is white noise; stationary variance matches") {
    ArchSpec white{1.0, {0.0}, ErrorDist::standard_normal()};
    const auto w = simulate_arch(white, 50'000, 10, RngStream(3));
    double var = 0.0;
    for (double x : w.values) var += x * x;
    var /= static_cast<double>(w.size());
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));

    ArchSpec spec{1.0, {0.5}, ErrorDist::standard_normal()};
    const auto s = simulate_arch(spec, 100'000, 500, RngStream(4));
    double var2 = 0.0;
    for (double x : s.values) var2 += x * x;
    var2 /= static_cast<double>(s.size());
    // c0 / (1 - b1) = 2. ARCH(1) with b = 0.5 has heavy tails, so allow a
    // wider band than the iid case.
    CHECK(var2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("doubling the burn-in leaves the sample variance within noise") {
    ArchSpec spec{1.0, {0.5}, ErrorDist::standard_normal()};
    const auto a = simulate_arch(spec, 100'000, 500, RngStream(8));
    const auto b = simulate_arch(spec, 100'000, 1000, RngStream(8));
    auto variance = [](const Series& s) {
        double acc = 0.0;
        for (double x : s.values) acc += x * x;
        return acc / static_cast<double>(s.size());
    };
    CHECK(std::fabs(variance(a) - variance(b)) < 0.05);
}

TEST_CASE("ARCH stationarity precondition") {
    CHECK_THROWS_AS(simulate_arch({1.0, {1.0}, ErrorDist::standard_normal()}, 100, 10,
                                  RngStream(1)),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_arch({0.0, {0.5}, ErrorDist::standard_normal()}, 100, 10,
                                  RngStream(1)),
                    std::invalid_argument);
}

TEST_CASE("arch_sigma2_path hand cases") {
    Series series;
    series.values = {1.0, 2.0};
    const double theta[] = {1.0, 0.5};
    const auto path = arch_sigma2_path(theta, series);
    REQUIRE(path.size() == 1);
    CHECK(path[0] == doctest::Approx(1.5).epsilon(1e-15));

    Series constant;
    constant.values = {3.0, -1.0, 2.0};
    const double theta0[] = {2.0, 0.0};
    for (double s2 : arch_sigma2_path(theta0, constant)) CHECK(s2 == 2.0);

    // Positivity: every entry is at least c0.
    RngStream stream(6);
    Series random;
    random.values.resize(50);
    for (auto& x : random.values) x = stream.normal();
    const double theta1[] = {0.25, 0.3};
    for (double s2 : arch_sigma2_path(theta1, random)) CHECK(s2 >= 0.25);

    Series too_short;
    too_short.values = {1.0};
    CHECK_THROWS_AS(arch_sigma2_path(theta, too_short), std::invalid_argument);
}

TEST_CASE("series csv round-trips exactly") {
    AR1Spec spec{0.9, 1.0, ErrorDist::student_t_standardized(3)};
    const auto series = simulate_ar1(spec, 257, RngStream(99));
    const auto path = std::filesystem::temp_directory_path() / "tsboot_series_roundtrip.csv";
    write_series_csv(series, path);
    const auto back = read_series_csv(path);
    REQUIRE(back.size() == series.size());
    for (std::size_t i = 0; i < series.size(); ++i) CHECK(back.values[i] == series.values[i]);
    std::filesystem::remove(path);
}

TEST_CASE("series csv rejects foreign headers") {
    const auto path = std::filesystem::temp_directory_path() / "tsboot_bad_header.csv";
    {
        std::ofstream out(path);
        out << "a,b\n1,2\n";
    }
    CHECK_THROWS_AS(read_series_csv(path), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("simulation is deterministic under a fixed stream") {
    ArchSpec spec{1.0, {0.3, 0.2}, ErrorDist::student_t_standardized(4)};
    const auto a = simulate_arch(spec, 300, 100, RngStream(13).child(7));
    const auto b = simulate_arch(spec, 300, 100, RngStream(13).child(7));
    CHECK(a.values == b.values);
}
