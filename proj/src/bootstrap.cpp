#include "tsboot/bootstrap.hpp"

#include "tsboot/kernels.hpp"
#include "tsboot/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tsboot::bootstrap {

namespace {

constexpr std::size_t kMaxRedrawsPerReplicate = 10'000;
constexpr std::size_t kArchBootstrapBurnIn = 50;
constexpr std::size_t kBootstrapRestarts = 2;

// Compacts per-replicate slots, skipping dropped ones, preserving replicate
// order so the result is independent of execution interleaving.
PivotSample assemble(std::vector<std::string> params,
                     const std::vector<std::vector<double>>& slots,
                     const std::vector<std::uint8_t>& dropped, PivotKind kind,
                     std::string pivot_def, PivotMeta meta) {
    PivotSample sample;
    sample.params = std::move(params);
    sample.kind = kind;
    sample.pivot_def = std::move(pivot_def);
    sample.draws.resize(sample.params.size());
    for (std::size_t b = 0; b < slots.size(); ++b) {
        if (dropped[b]) continue;
        for (std::size_t j = 0; j < sample.params.size(); ++j) {
            sample.draws[j].push_back(slots[b][j]);
        }
    }
    meta.replicates = sample.draws.empty() ? 0 : sample.draws[0].size();
    meta.dropped_replicates = static_cast<std::size_t>(
        std::count(dropped.begin(), dropped.end(), std::uint8_t{1}));
    sample.meta = std::move(meta);
    return sample;
}

}  // namespace

std::string pivot_kind_name(PivotKind kind) {
    switch (kind) {
        case PivotKind::monte_carlo: return "monte_carlo";
        case PivotKind::residual_bs: return "residual_bs";
        case PivotKind::weighted_bs: return "weighted_bs";
        case PivotKind::mn_residual_bs: return "mn_residual_bs";
    }
    return "?";
}

void write_pivot_csv(const PivotSample& sample, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "replicate,param,pivot\n";
    char buf[64];
    for (std::size_t b = 0; sample.draws.size() && b < sample.draws[0].size(); ++b) {
        for (std::size_t j = 0; j < sample.params.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", sample.draws[j][b]);
            out << b << ',' << sample.params[j] << ',' << buf << '\n';
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

PivotSample read_pivot_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "replicate,param,pivot") {
        throw std::runtime_error("pivot csv must start with 'replicate,param,pivot': " +
                                 path.string());
    }
    PivotSample sample;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw std::runtime_error("malformed pivot row: " + line);
        }
        const std::string param = line.substr(c1 + 1, c2 - c1 - 1);
        const double value = std::stod(line.substr(c2 + 1));
        auto it = std::find(sample.params.begin(), sample.params.end(), param);
        std::size_t j;
        if (it == sample.params.end()) {
            sample.params.push_back(param);
            sample.draws.emplace_back();
            j = sample.params.size() - 1;
        } else {
            j = static_cast<std::size_t>(it - sample.params.begin());
        }
        sample.draws[j].push_back(value);
    }
    if (sample.params.empty()) throw std::runtime_error("empty pivot csv: " + path.string());
    sample.meta.replicates = sample.draws[0].size();
    return sample;
}

PivotSample ar1_residual_bootstrap(const processes::Series& series, std::size_t B,
                                   rng::RngStream stream, unsigned threads) {
    if (B == 0) throw std::invalid_argument("B must be >= 1");
    const auto fit = estimators::ar1_lse(series);
    const double theta_hat = fit.estimate[0];
    const auto& v = series.values;
    const std::size_t n = v.size();
    const std::size_t m = n - 1;

    // Standardize residuals to mean 0, mean-square 1 over their count.
    std::vector<double> resid(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        resid[i] = v[i + 1] - theta_hat * v[i];
        mean += resid[i];
    }
    mean /= static_cast<double>(m);
    double msq = 0.0;
    for (auto& r : resid) {
        r -= mean;
        msq += r * r;
    }
    msq /= static_cast<double>(m);
    if (!(msq > 1e-300)) {
        throw std::runtime_error("ar1_residual_bootstrap: degenerate residuals (all equal)");
    }
    const double inv_sd = 1.0 / std::sqrt(msq);
    for (auto& r : resid) r *= inv_sd;

    const double sqrt_n = std::sqrt(static_cast<double>(n));
    std::vector<std::vector<double>> slots(B, std::vector<double>(1));
    std::vector<std::uint8_t> dropped(B, 0);

    parallel::parallel_for(B, threads, [&](std::size_t b) {
        auto replicate_stream = stream.child(b);
        processes::Series star;
        star.values.resize(n);
        star.values[0] = resid[replicate_stream.uniform_below(m)];
        for (std::size_t t = 1; t < n; ++t) {
            star.values[t] = theta_hat * star.values[t - 1] +
                             resid[replicate_stream.uniform_below(m)];
        }
        try {
            const auto refit = estimators::ar1_lse(star);
            slots[b][0] = sqrt_n * (refit.estimate[0] - theta_hat);
        } catch (const std::exception&) {
            dropped[b] = 1;
        }
    });

    PivotMeta meta;
    meta.n = n;
    meta.scheme = "resample(" + std::to_string(m) + " residuals)";
    return assemble({"theta"}, slots, dropped, PivotKind::residual_bs,
                    "sqrt(n)*(theta_star - theta_hat)", meta);
}

PivotSample ar1_weighted_bootstrap(const processes::Series& series,
                                   const weights::WeightScheme& scheme, std::size_t B,
                                   rng::RngStream stream, unsigned threads) {
    if (B == 0) throw std::invalid_argument("B must be >= 1");
    const auto& v = series.values;
    const std::size_t n = v.size();
    const std::size_t m = n - 1;
    if (scheme.n() != m) {
        throw std::invalid_argument("weight scheme row length must equal series length - 1");
    }
    const auto fit = estimators::ar1_lse(series);
    const double theta_hat = fit.estimate[0];
    const auto& ops = kernels::active();
    const double den0 = ops.sum_sq(v.data(), m);
    const double sigma_n = std::sqrt(scheme.sigma_n_sq());
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    std::vector<std::vector<double>> slots(B, std::vector<double>(1));
    std::vector<std::uint8_t> dropped(B, 0);
    std::vector<std::size_t> rejects(B, 0);

    parallel::parallel_for(B, threads, [&](std::size_t b) {
        auto replicate_stream = stream.child(b);
        for (std::size_t attempt = 0; attempt < kMaxRedrawsPerReplicate; ++attempt) {
            const auto row = weights::generate_weights(replicate_stream, scheme);
            const double den = ops.weighted_sum_sq(row.data(), v.data(), m);
            if (std::fabs(den) < 1e-8 * den0) {
                ++rejects[b];
                continue;
            }
            const double num = ops.triple_dot(row.data(), v.data() + 1, v.data(), m);
            slots[b][0] = sqrt_n * (num / den - theta_hat) / sigma_n;
            return;
        }
        throw std::runtime_error("ar1_weighted_bootstrap: replicate exceeded redraw budget");
    });

    const std::size_t total_rejects = std::accumulate(rejects.begin(), rejects.end(),
                                                      std::size_t{0});
    if (static_cast<double>(total_rejects) > 0.01 * static_cast<double>(B + total_rejects)) {
        throw std::runtime_error(
            "ar1_weighted_bootstrap: rejection rate above 1%; scheme unsuitable for this series");
    }

    PivotMeta meta;
    meta.n = n;
    meta.scheme = scheme.name();
    meta.rejected_rows = total_rejects;
    return assemble({"theta"}, slots, dropped, PivotKind::weighted_bs,
                    "sqrt(n)/sigma_n*(theta_star - theta_hat)", meta);
}

PivotSample ar1_weighted_lad_bootstrap(const processes::Series& series,
                                       const weights::WeightScheme& scheme, std::size_t B,
                                       rng::RngStream stream, unsigned threads) {
    if (B == 0) throw std::invalid_argument("B must be >= 1");
    const auto& v = series.values;
    const std::size_t n = v.size();
    const std::size_t m = n - 1;
    if (scheme.n() != m) {
        throw std::invalid_argument("weight scheme row length must equal series length - 1");
    }
    const auto fit = estimators::ar1_lad(series);
    const double theta_hat = fit.estimate[0];

    // Candidate ratios are fixed across replicates; presort them once and per
    // replicate only rescan cumulative weights in that order.
    struct Candidate {
        double ratio;
        double base_weight;  // |X_{t-1}|
        std::size_t pair;    // summand index the weight row applies to
    };
    std::vector<Candidate> cand;
    cand.reserve(m);
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i - 1] == 0.0) continue;
        cand.push_back({v[i] / v[i - 1], std::fabs(v[i - 1]), i - 1});
    }
    std::sort(cand.begin(), cand.end(),
              [](const Candidate& a, const Candidate& b) { return a.ratio < b.ratio; });

    const double sigma_n = std::sqrt(scheme.sigma_n_sq());
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    std::vector<std::vector<double>> slots(B, std::vector<double>(1));
    std::vector<std::uint8_t> dropped(B, 0);
    std::vector<std::size_t> rejects(B, 0);

    parallel::parallel_for(B, threads, [&](std::size_t b) {
        auto replicate_stream = stream.child(b);
        std::vector<double> cw(cand.size());
        for (std::size_t attempt = 0; attempt < kMaxRedrawsPerReplicate; ++attempt) {
            const auto row = weights::generate_weights(replicate_stream, scheme);
            bool negative = false;
            for (double w : row) {
                if (w < 0.0) {
                    negative = true;
                    break;
                }
            }
            if (negative) {
                ++rejects[b];
                continue;
            }
            double total = 0.0;
            for (std::size_t k = 0; k < cand.size(); ++k) {
                cw[k] = row[cand[k].pair] * cand[k].base_weight;
                total += cw[k];
            }
            if (!(total > 0.0)) {  // all surviving weight landed on zero-lag pairs
                ++rejects[b];
                continue;
            }
            const double half = total / 2.0;
            double below = 0.0;
            double theta_star = cand.back().ratio;
            for (std::size_t k = 0; k < cand.size();) {
                const double ratio = cand[k].ratio;
                double at = 0.0;
                std::size_t j = k;
                while (j < cand.size() && cand[j].ratio == ratio) at += cw[j++];
                if (below <= half && total - below - at <= half) {
                    theta_star = ratio;
                    break;
                }
                below += at;
                k = j;
            }
            slots[b][0] = sqrt_n * (theta_star - theta_hat) / sigma_n;
            return;
        }
        throw std::runtime_error("ar1_weighted_lad_bootstrap: replicate exceeded redraw budget");
    });

    const std::size_t total_rejects = std::accumulate(rejects.begin(), rejects.end(),
                                                      std::size_t{0});
    if (static_cast<double>(total_rejects) > 0.5 * static_cast<double>(B + total_rejects)) {
        throw std::runtime_error(
            "ar1_weighted_lad_bootstrap: more than half the weight rows were negative; "
            "use a nonnegative scheme such as multinomial");
    }

    PivotMeta meta;
    meta.n = n;
    meta.scheme = scheme.name();
    meta.rejected_rows = total_rejects;
    return assemble({"theta"}, slots, dropped, PivotKind::weighted_bs,
                    "sqrt(n)/sigma_n*(theta_lad_star - theta_lad_hat)", meta);
}

double arch_tau_hat_sq(const processes::Series& series, std::span<const double> theta_hat) {
    const auto sigma2 = processes::arch_sigma2_path(theta_hat, series);
    const std::size_t p = theta_hat.size() - 1;
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t t = 0; t < sigma2.size(); ++t) {
        const double e = series.values[t + p] / std::sqrt(sigma2[t]);
        m2 += e * e;
        m4 += e * e * e * e;
    }
    const double q = static_cast<double>(sigma2.size());
    m2 /= q;
    m4 /= q;
    return m4 - m2 * m2;
}

namespace {

std::vector<std::string> arch_param_names(std::size_t p) {
    std::vector<std::string> names{"c0"};
    for (std::size_t j = 1; j <= p; ++j) names.push_back("b" + std::to_string(j));
    return names;
}

}  // namespace

PivotSample arch_mn_residual_bootstrap(const processes::Series& series, std::size_t p,
                                       std::size_t m, std::size_t B, rng::RngStream stream,
                                       unsigned threads) {
    if (B == 0) throw std::invalid_argument("B must be >= 1");
    const std::size_t n = series.size();
    if (m < p + 20 || m > n) {
        throw std::invalid_argument("arch_mn_residual_bootstrap: need p + 20 <= m <= n");
    }
    const auto fit = estimators::arch_fit(series, p, estimators::ArchVariant::gaussian_nll);
    const auto& theta_hat = fit.estimate;

    const auto sigma2 = processes::arch_sigma2_path(theta_hat, series);
    const std::size_t q = sigma2.size();
    std::vector<double> resid(q);
    double mean = 0.0;
    for (std::size_t t = 0; t < q; ++t) {
        resid[t] = series.values[t + p] / std::sqrt(sigma2[t]);
        mean += resid[t];
    }
    mean /= static_cast<double>(q);
    double msq = 0.0;
    for (auto& e : resid) {
        e -= mean;
        msq += e * e;
    }
    msq /= static_cast<double>(q);
    if (!(msq > 1e-300)) {
        throw std::runtime_error("arch_mn_residual_bootstrap: degenerate residuals");
    }
    const double inv_sd = 1.0 / std::sqrt(msq);
    for (auto& e : resid) e *= inv_sd;

    const double sqrt_m = std::sqrt(static_cast<double>(m));
    std::vector<std::vector<double>> slots(B, std::vector<double>(p + 1));
    std::vector<std::uint8_t> dropped(B, 0);

    parallel::parallel_for(B, threads, [&](std::size_t b) {
        auto replicate_stream = stream.child(b);
        // Regenerate through the fitted recursion: presample zeros, burn-in,
        // then m retained values.
        std::vector<double> x(p + kArchBootstrapBurnIn + m, 0.0);
        for (std::size_t t = p; t < x.size(); ++t) {
            double s2 = theta_hat[0];
            for (std::size_t j = 0; j < p; ++j) {
                s2 += theta_hat[j + 1] * x[t - 1 - j] * x[t - 1 - j];
            }
            x[t] = std::sqrt(s2) * resid[replicate_stream.uniform_below(q)];
        }
        processes::Series star;
        star.spec_tag = "arch_mn_bootstrap";
        star.values.assign(x.end() - static_cast<std::ptrdiff_t>(m), x.end());
        try {
            const auto refit = estimators::arch_fit_from(
                star, p, estimators::ArchVariant::gaussian_nll, theta_hat, kBootstrapRestarts);
            const double tau_star_sq = arch_tau_hat_sq(star, refit.estimate);
            if (!(tau_star_sq > 0.0) || !std::isfinite(tau_star_sq)) {
                dropped[b] = 1;
                return;
            }
            const double tau_star = std::sqrt(tau_star_sq);
            for (std::size_t j = 0; j <= p; ++j) {
                slots[b][j] = sqrt_m * (refit.estimate[j] - theta_hat[j]) / tau_star;
            }
        } catch (const std::exception&) {
            dropped[b] = 1;
        }
    });

    const auto drops = static_cast<std::size_t>(
        std::count(dropped.begin(), dropped.end(), std::uint8_t{1}));
    if (static_cast<double>(drops) > 0.05 * static_cast<double>(B)) {
        throw std::runtime_error("arch_mn_residual_bootstrap: more than 5% of replicates failed");
    }

    PivotMeta meta;
    meta.n = n;
    meta.scheme = "m=" + std::to_string(m) + "/n=" + std::to_string(n);
    return assemble(arch_param_names(p), slots, dropped, PivotKind::mn_residual_bs,
                    "sqrt(m)*(theta_star - theta_hat)/tau_star", meta);
}

PivotSample arch_weighted_bootstrap(const processes::Series& series, std::size_t p,
                                    estimators::ArchVariant variant,
                                    const weights::WeightScheme& scheme, std::size_t B,
                                    rng::RngStream stream, unsigned threads) {
    if (B == 0) throw std::invalid_argument("B must be >= 1");
    if (variant != estimators::ArchVariant::gaussian_nll &&
        variant != estimators::ArchVariant::lade2) {
        throw std::invalid_argument("arch_weighted_bootstrap supports gaussian_nll and lade2");
    }
    const std::size_t n = series.size();
    if (scheme.n() != n - p) {
        throw std::invalid_argument("weight scheme row length must equal series length - p");
    }
    const auto fit = estimators::arch_fit(series, p, variant);
    const auto& theta_hat = fit.estimate;
    const double sigma_n = std::sqrt(scheme.sigma_n_sq());
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    std::vector<std::vector<double>> slots(B, std::vector<double>(p + 1));
    std::vector<std::uint8_t> dropped(B, 0);

    parallel::parallel_for(B, threads, [&](std::size_t b) {
        auto replicate_stream = stream.child(b);
        auto row = weights::generate_weights(replicate_stream, scheme);
        try {
            const estimators::ArchObjective objective(series, p, variant, std::move(row));
            const auto refit = estimators::minimize_box_positive(
                [&objective](std::span<const double> theta) { return objective(theta); },
                theta_hat, kBootstrapRestarts);
            for (std::size_t j = 0; j <= p; ++j) {
                slots[b][j] = sqrt_n * (refit.estimate[j] - theta_hat[j]) / sigma_n;
            }
        } catch (const std::exception&) {
            dropped[b] = 1;
        }
    });

    const auto drops = static_cast<std::size_t>(
        std::count(dropped.begin(), dropped.end(), std::uint8_t{1}));
    if (static_cast<double>(drops) > 0.05 * static_cast<double>(B)) {
        throw std::runtime_error("arch_weighted_bootstrap: more than 5% of replicates failed");
    }

    PivotMeta meta;
    meta.n = n;
    meta.scheme = scheme.name();
    return assemble(arch_param_names(p), slots, dropped, PivotKind::weighted_bs,
                    "sqrt(n)/sigma_n*(theta_star - theta_hat)", meta);
}

}  // namespace tsboot::bootstrap
