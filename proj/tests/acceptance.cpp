// Acceptance suite: one test case per criterion, each printing a PASS/FAIL
// line. Oracles here are coded independently of the library internals they
// check (enumeration, double loops, long-double series, golden section).
#include "tsboot/bootstrap.hpp"
#include "tsboot/estimators.hpp"
#include "tsboot/processes.hpp"
#include "tsboot/rng.hpp"
#include "tsboot/stats.hpp"
#include "tsboot/weights.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

using namespace tsboot;
using processes::Series;
using rng::ErrorDist;
using rng::RngStream;
using weights::WeightScheme;

namespace fs = std::filesystem;

namespace {

void report_line(int criterion, bool pass, const std::string& what) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str());
    std::fflush(stdout);
}

double sample_variance(std::span<const double> draws) {
    return stats::moment_summary(draws).var;
}

Series simulate_two_period(double s1_sq, double s2_sq, std::size_t n, RngStream stream) {
    return processes::simulate_hetero_ar1(
        {0.5, processes::TauSchedule::two_period_var(s1_sq, s2_sq),
         ErrorDist::standard_normal()},
        n, stream);
}

}  // namespace

TEST_CASE("criterion_1: multinomial weight moments, exact and empirical") {
    bool pass = true;

    // Exact part: trinomial enumeration of (w1, w2), independent of the
    // formulas in the library.
    for (int n = 2; n <= 8 && pass; ++n) {
        const double p = 1.0 / n;
        double var = 0.0, cov = 0.0, fourth = 0.0;
        for (int a = 0; a <= n; ++a) {
            for (int b = 0; a + b <= n; ++b) {
                const int rest = n - a - b;
                double log_pmf = std::lgamma(n + 1.0) - std::lgamma(a + 1.0) -
                                 std::lgamma(b + 1.0) - std::lgamma(rest + 1.0) +
                                 (a + b) * std::log(p);
                if (rest > 0) log_pmf += rest * std::log(1.0 - 2.0 * p);
                const double pmf = std::exp(log_pmf);
                var += pmf * (a - 1.0) * (a - 1.0);
                cov += pmf * (a - 1.0) * (b - 1.0);
                fourth += pmf * std::pow(a - 1.0, 4);
            }
        }
        const auto analytic = weights::weight_moments(WeightScheme::multinomial(n));
        pass = pass && std::fabs(analytic.var - var) < 1e-12 &&
               std::fabs(analytic.cov - cov) < 1e-12 &&
               std::fabs(*analytic.fourth_central - fourth) < 1e-12;
    }

    // Empirical part: 1e4 rows at n = 100, moments within 4 standard errors.
    {
        const std::size_t rows = 10'000;
        const auto scheme = WeightScheme::multinomial(100);
        const auto analytic = weights::weight_moments(scheme);
        RngStream stream(1001);
        double mean = 0.0, var = 0.0, cov = 0.0;
        std::vector<double> w1(rows), w2(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto row = weights::generate_weights(stream, scheme);
            w1[r] = row[0];
            w2[r] = row[1];
            mean += row[0];
        }
        mean /= rows;
        for (std::size_t r = 0; r < rows; ++r) {
            var += (w1[r] - mean) * (w1[r] - mean);
            cov += (w1[r] - mean) * (w2[r] - mean);
        }
        var /= rows - 1;
        cov /= rows - 1;
        const double se_mean = std::sqrt(analytic.var / rows);
        const double se_var =
            std::sqrt((*analytic.fourth_central - analytic.var * analytic.var) / rows);
        const double se_cov = std::sqrt(analytic.var * analytic.var / rows);
        pass = pass && std::fabs(mean - 1.0) < 4 * se_mean &&
               std::fabs(var - analytic.var) < 4 * se_var &&
               std::fabs(cov - analytic.cov) < 4 * se_cov;
    }

    report_line(1, pass, "weight-moment exactness (n=2..8 enumeration; n=100 empirical)");
    CHECK(pass);
}

TEST_CASE("criterion_2: LSE limit law variance in [0.60, 0.90]") {
    RngStream root(2002);
    const std::size_t n = 2000;
    std::vector<double> pivots(500);
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        const auto series = processes::simulate_ar1({0.5, 1.0, ErrorDist::standard_normal()}, n,
                                                    root.child(r));
        pivots[r] = std::sqrt((double)n) * (estimators::ar1_lse(series).estimate[0] - 0.5);
    }
    const double var = sample_variance(pivots);
    const bool pass = var >= 0.60 && var <= 0.90;
    report_line(2, pass, "Var(sqrt(n)(lse - theta)) = " + std::to_string(var) + ", target 0.75");
    CHECK(pass);
}

TEST_CASE("criterion_3: LAD limit law variance in [0.93, 1.45]") {
    RngStream root(3003);
    const std::size_t n = 2000;
    std::vector<double> pivots(500);
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        const auto series = processes::simulate_ar1({0.5, 1.0, ErrorDist::standard_normal()}, n,
                                                    root.child(r));
        pivots[r] = std::sqrt((double)n) * (estimators::ar1_lad(series).estimate[0] - 0.5);
    }
    const double var = sample_variance(pivots);
    const bool pass = var >= 0.93 && var <= 1.45;
    report_line(3, pass,
                "Var(sqrt(n)(lad - theta)) = " + std::to_string(var) + ", target 1.178");
    CHECK(pass);
}

TEST_CASE("criterion_4: weighted-bootstrap consistency across 10 seeds") {
    int passes = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RngStream root(4000 + seed);
        const std::size_t n = 2000;
        const auto series = processes::simulate_ar1({0.5, 1.0, ErrorDist::standard_normal()}, n,
                                                    root.child(0));
        const auto wb = bootstrap::ar1_weighted_bootstrap(
            series, WeightScheme::multinomial(n - 1), 2000, root.child(1), 2);
        auto ref_stream = root.child(2);
        std::vector<double> reference(2000);
        for (auto& x : reference) x = std::sqrt(0.75) * ref_stream.normal();
        if (stats::ks_two_sample(wb.draws[0], reference).p_value > 0.01) ++passes;
    }
    const bool pass = passes >= 9;
    report_line(4, pass,
                "KS(WB pivots, N(0,0.75)) at 1% passes in " + std::to_string(passes) + "/10 seeds");
    CHECK(pass);
}

TEST_CASE("criterion_5: two-period weighted-bootstrap variance in [0.56, 0.84]") {
    RngStream root(5005);
    const std::size_t n = 2000;
    const auto series = simulate_two_period(1.0, 2.0, n, root.child(0));
    const auto wb = bootstrap::ar1_weighted_bootstrap(series, WeightScheme::multinomial(n - 1),
                                                      2000, root.child(1), 2);
    const double var = sample_variance(wb.draws[0]);
    const bool pass = var >= 0.56 && var <= 0.84;
    report_line(5, pass, "WB pivot variance = " + std::to_string(var) + ", target 0.7");
    CHECK(pass);
}

TEST_CASE("criterion_6: desk-scale directional reproduction of the bootstrap comparison") {
    auto run_setting = [&](double s2_sq, std::uint64_t seed, double& rb_p, double& wb_p) {
        RngStream root(6000 + seed + (s2_sq > 5 ? 100 : 0));
        const std::size_t n = 50;
        const auto fixed = simulate_two_period(1.0, s2_sq, n, root.child(0));
        std::vector<double> mc(200);
        auto mc_root = root.child(1);
        for (std::size_t r = 0; r < mc.size(); ++r) {
            const auto s = simulate_two_period(1.0, s2_sq, n, mc_root.child(r));
            mc[r] = std::sqrt((double)n) * (estimators::ar1_lse(s).estimate[0] - 0.5);
        }
        const auto rb = bootstrap::ar1_residual_bootstrap(fixed, 200, root.child(2));
        const auto wb = bootstrap::ar1_weighted_bootstrap(
            fixed, WeightScheme::iid_normal(n - 1, 1.0), 200, root.child(3));
        rb_p = stats::ks_two_sample(mc, rb.draws[0]).p_value;
        wb_p = stats::ks_two_sample(mc, wb.draws[0]).p_value;
    };

    int both_pass = 0;
    std::vector<double> rb_ps10, wb_ps10;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        double rb_p = 0.0, wb_p = 0.0;
        run_setting(2.0, seed, rb_p, wb_p);
        if (rb_p > 0.05 && wb_p > 0.05) ++both_pass;
        run_setting(10.0, seed, rb_p, wb_p);
        rb_ps10.push_back(rb_p);
        wb_ps10.push_back(wb_p);
    }
    const double rb_med = stats::quantile(rb_ps10, 0.5);
    const double wb_med = stats::quantile(wb_ps10, 0.5);
    const bool pass = both_pass >= 6 && wb_med > rb_med;
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "s2=2: both pass in %d/10 seeds; s2=10: median p WB %.3f vs RB %.3f",
                  both_pass, wb_med, rb_med);
    report_line(6, pass, msg);
    CHECK(pass);
}

TEST_CASE("criterion_7: ARCH estimator error ordering across error laws") {
    const std::size_t n = 100;
    const std::size_t reps = 200;
    const std::vector<ErrorDist> dists{ErrorDist::standard_normal(),
                                       ErrorDist::student_t_standardized(3),
                                       ErrorDist::student_t_standardized(4)};
    const std::vector<estimators::ArchVariant> variants{
        estimators::ArchVariant::gaussian_nll, estimators::ArchVariant::lade1,
        estimators::ArchVariant::lade2, estimators::ArchVariant::lade3};

    std::map<std::string, double> err;
    RngStream root(7007);
    for (std::size_t d = 0; d < dists.size(); ++d) {
        processes::ArchSpec spec{1.0, {0.5}, dists[d]};
        std::vector<Series> series(reps);
        auto dist_root = root.child(d);
        for (std::size_t r = 0; r < reps; ++r) {
            series[r] = processes::simulate_arch(spec, n, 500, dist_root.child(r));
        }
        for (auto variant : variants) {
            double acc = 0.0;
            std::size_t used = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                try {
                    const auto fit = estimators::arch_fit(series[r], 1, variant);
                    if (std::fabs(fit.estimate[1]) < 1e-6) continue;
                    acc += std::fabs(fit.estimate[0] / fit.estimate[1] - 2.0);
                    ++used;
                } catch (const std::exception&) {
                }
            }
            err[dists[d].name() + "/" + estimators::arch_variant_name(variant)] =
                acc / static_cast<double>(used);
        }
    }

    const bool normal_order = err["normal/gaussian_nll"] < err["normal/lade2"];
    const bool t3_order = err["t3/lade2"] < err["t3/gaussian_nll"];
    bool lade3_worst = true;
    for (const auto& dist : dists) {
        const std::string worst = dist.name() + "/lade3";
        for (auto variant : variants) {
            const std::string key = dist.name() + "/" + estimators::arch_variant_name(variant);
            if (key != worst && err[key] >= err[worst]) lade3_worst = false;
        }
    }
    const bool pass = normal_order && t3_order && lade3_worst;
    char msg[320];
    std::snprintf(msg, sizeof(msg),
                  "normal ml %.2f < lade2 %.2f [%s]; t3 lade2 %.2f < ml %.2f [%s]; lade3 worst "
                  "in every row [%s] (lade1 %.1f/%.1f/%.1f vs lade3 %.1f/%.1f/%.1f)",
                  err["normal/gaussian_nll"], err["normal/lade2"], normal_order ? "ok" : "FAIL",
                  err["t3/lade2"], err["t3/gaussian_nll"], t3_order ? "ok" : "FAIL",
                  lade3_worst ? "ok" : "FAIL", err["normal/lade1"], err["t3/lade1"],
                  err["t4/lade1"], err["normal/lade3"], err["t3/lade3"], err["t4/lade3"]);
    report_line(7, pass, msg);
    CHECK(normal_order);
    CHECK(t3_order);
    CHECK(lade3_worst);
}

TEST_CASE("criterion_8: Kolmogorov series oracle") {
    auto reference = [](double x) {
        long double s = 0.0L;
        for (int k = 1; k <= 5000; ++k) {
            const long double term = std::exp((long double)(-2.0L * k * k * x * x));
            s += (k % 2 == 1 ? term : -term);
        }
        return (double)(2.0L * s);
    };
    bool pass = std::fabs(stats::kolmogorov_q(1.0) - 0.27000) < 1e-4;
    double prev = 1.0 + 1e-15;
    for (int i = 1; i <= 100; ++i) {
        const double lambda = 0.25 + 0.03 * i;
        const double q = stats::kolmogorov_q(lambda);
        if (std::fabs(q - reference(lambda)) > 1e-9) pass = false;
        if (q > prev) pass = false;
        prev = q;
    }
    char msg[96];
    std::snprintf(msg, sizeof(msg), "Q(1.0) = %.6f (target 0.27000), monotone on 100-point grid",
                  stats::kolmogorov_q(1.0));
    report_line(8, pass, msg);
    CHECK(pass);
}

TEST_CASE("criterion_9: oracle equivalence suites") {
    bool pass = true;

    // LAD vs golden-section search, 500 instances at 1e-8.
    {
        RngStream root(9001);
        for (int rep = 0; rep < 500 && pass; ++rep) {
            auto stream = root.child(rep);
            const std::size_t n = 10 + stream.uniform_below(191);
            Series series;
            series.values.resize(n);
            for (auto& v : series.values) v = stream.normal();
            const double theta_hat = estimators::ar1_lad(series).estimate[0];
            auto objective = [&](double theta) {
                double acc = 0.0;
                for (std::size_t i = 1; i < n; ++i) {
                    acc += std::fabs(series.values[i] - theta * series.values[i - 1]);
                }
                return acc;
            };
            double lo = theta_hat - 5.0, hi = theta_hat + 5.0;
            const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
            double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
            double fc = objective(c), fd = objective(d);
            for (int i = 0; i < 250; ++i) {
                if (fc < fd) {
                    hi = d; d = c; fd = fc;
                    c = hi - phi * (hi - lo);
                    fc = objective(c);
                } else {
                    lo = c; c = d; fc = fd;
                    d = lo + phi * (hi - lo);
                    fd = objective(d);
                }
            }
            const double f_fit = objective(theta_hat);
            const double f_gold = objective(0.5 * (lo + hi));
            if (f_fit > f_gold + 1e-8 * (1.0 + std::fabs(f_gold))) pass = false;
        }
    }

    // Weighted median vs brute force over candidates, 200 instances, exact.
    {
        RngStream root(9002);
        for (int rep = 0; rep < 200 && pass; ++rep) {
            auto stream = root.child(rep);
            const std::size_t n = 1 + stream.uniform_below(40);
            std::vector<double> values(n), w(n);
            for (std::size_t i = 0; i < n; ++i) {
                values[i] = std::round(stream.normal() * 4.0) / 4.0;
                w[i] = stream.uniform01();
            }
            const double med = estimators::weighted_median(values, w);
            auto objective = [&](double m) {
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) acc += w[i] * std::fabs(values[i] - m);
                return acc;
            };
            double best = objective(values[0]);
            for (double v : values) best = std::min(best, objective(v));
            if (std::fabs(objective(med) - best) > 1e-12 * (1.0 + best)) pass = false;
        }
    }

    // KS D vs double loop, 200 instances at 1e-12.
    {
        RngStream root(9003);
        for (int rep = 0; rep < 200 && pass; ++rep) {
            auto stream = root.child(rep);
            const std::size_t n1 = 1 + stream.uniform_below(50);
            const std::size_t n2 = 1 + stream.uniform_below(50);
            std::vector<double> a(n1), b(n2);
            for (auto& x : a) x = std::round(stream.normal() * 8.0) / 8.0;
            for (auto& x : b) x = std::round(stream.normal() * 8.0) / 8.0;
            const double d_fast = stats::ks_two_sample(a, b).d_stat;
            double d_slow = 0.0;
            std::vector<double> pool(a);
            pool.insert(pool.end(), b.begin(), b.end());
            for (double v : pool) {
                double fa = 0.0, fb = 0.0;
                for (double x : a) fa += (x <= v) ? 1.0 : 0.0;
                for (double x : b) fb += (x <= v) ? 1.0 : 0.0;
                d_slow = std::max(d_slow, std::fabs(fa / n1 - fb / n2));
            }
            if (std::fabs(d_fast - d_slow) > 1e-12) pass = false;
        }
    }

    // ARCH objectives vs a straightforward re-implementation, 100 at 1e-12.
    {
        RngStream root(9004);
        for (int rep = 0; rep < 100 && pass; ++rep) {
            auto stream = root.child(rep);
            const std::size_t p = 1 + stream.uniform_below(2);
            const std::size_t n = p + 10 + stream.uniform_below(90);
            Series series;
            series.values.resize(n);
            for (auto& v : series.values) v = stream.normal() + 0.01;
            std::vector<double> theta(p + 1);
            theta[0] = 0.1 + stream.uniform01();
            for (std::size_t j = 1; j <= p; ++j) theta[j] = stream.uniform01() * 0.9;
            for (auto variant :
                 {estimators::ArchVariant::gaussian_nll, estimators::ArchVariant::lade1,
                  estimators::ArchVariant::lade2, estimators::ArchVariant::lade3}) {
                long double want = 0.0L;
                for (std::size_t t = p; t < n; ++t) {
                    long double s2 = theta[0];
                    for (std::size_t j = 1; j <= p; ++j) {
                        s2 += (long double)theta[j] * series.values[t - j] * series.values[t - j];
                    }
                    const long double x2 = (long double)series.values[t] * series.values[t];
                    switch (variant) {
                        case estimators::ArchVariant::gaussian_nll:
                            want += std::log(s2) + x2 / s2;
                            break;
                        case estimators::ArchVariant::lade1:
                            want += std::fabs(x2 / s2 - 1.0L);
                            break;
                        case estimators::ArchVariant::lade2:
                            want += std::fabs(std::log(x2) - std::log(s2));
                            break;
                        case estimators::ArchVariant::lade3:
                            want += std::fabs(x2 - s2);
                            break;
                    }
                }
                const double got = estimators::arch_objective(theta, series, variant);
                if (std::fabs((long double)got - want) > 1e-12L * (1.0L + std::fabs(want))) {
                    pass = false;
                }
            }
        }
    }

    report_line(9, pass, "LAD/golden-section, weighted-median, KS, ARCH-objective oracles agree");
    CHECK(pass);
}

TEST_CASE("criterion_10: byte-identical reports for every shipped config, 1 and 8 workers") {
#ifndef TSBOOT_CLI_PATH
#error "TSBOOT_CLI_PATH must be defined"
#endif
    const fs::path cli = TSBOOT_CLI_PATH;
    const fs::path config_dir = TSBOOT_CONFIG_DIR;
    REQUIRE(fs::exists(cli));
    REQUIRE(fs::exists(config_dir));

    std::vector<fs::path> configs;
    for (const auto& entry : fs::directory_iterator(config_dir)) {
        if (entry.path().extension() == ".json") configs.push_back(entry.path());
    }
    std::sort(configs.begin(), configs.end());
    REQUIRE(!configs.empty());

    auto snapshot = [](const fs::path& dir) {
        std::map<std::string, std::string> bytes;
        for (const auto& entry : fs::recursive_directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            std::ifstream in(entry.path(), std::ios::binary);
            bytes[fs::relative(entry.path(), dir).generic_string()] = std::string(
                (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        }
        return bytes;
    };

    bool pass = true;
    const fs::path work = fs::temp_directory_path() / "tsboot_acceptance_determinism";
    for (const auto& config : configs) {
        fs::remove_all(work);
        fs::create_directories(work);
        auto run = [&](int threads) {
            const std::string cmd = "cd '" + work.string() + "' && TSBOOT_THREADS= '" +
                                    cli.string() + "' run '" + config.string() + "' --threads " +
                                    std::to_string(threads) + " > /dev/null";
            return std::system(cmd.c_str()) == 0;
        };
        if (!run(1)) {
            pass = false;
            std::printf("  config %s failed to run\n", config.filename().string().c_str());
            continue;
        }
        const auto first = snapshot(work / "out");
        bool identical = true;
        for (int threads : {1, 8, 8}) {
            if (!run(threads) || snapshot(work / "out") != first) identical = false;
        }
        if (!identical) {
            pass = false;
            std::printf("  config %s: outputs differ across runs\n",
                        config.filename().string().c_str());
        }
    }
    fs::remove_all(work);
    report_line(10, pass,
                "all " + std::to_string(configs.size()) +
                    " shipped configs reproduce byte-identical reports");
    CHECK(pass);
}
