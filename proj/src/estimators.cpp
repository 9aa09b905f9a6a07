#include "tsboot/estimators.hpp"

#include "tsboot/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsboot::estimators {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_min_length(const processes::Series& series, std::size_t min_len) {
    if (series.size() < min_len) {
        throw std::invalid_argument("series too short for this estimator");
    }
}

}  // namespace

EstimatorResult ar1_lse(const processes::Series& series) {
    require_min_length(series, 2);
    const auto& v = series.values;
    const std::size_t m = v.size() - 1;  // summands t = 2..n
    const auto& ops = kernels::active();
    const double num = ops.dot(v.data() + 1, v.data(), m);
    const double den = ops.sum_sq(v.data(), m);
    if (!(den > 0.0)) {
        throw std::invalid_argument("ar1_lse: all lagged values are zero");
    }
    EstimatorResult result;
    result.estimate = {num / den};
    // SSE at the estimate.
    double sse = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double r = v[i] - result.estimate[0] * v[i - 1];
        sse += r * r;
    }
    result.objective = sse;
    result.converged = true;
    return result;
}

EstimatorResult ar1_wlse(const processes::Series& series, std::span<const double> tau) {
    require_min_length(series, 2);
    const auto& v = series.values;
    const std::size_t m = v.size() - 1;
    if (tau.size() != m) {
        throw std::invalid_argument("ar1_wlse: need one tau per summand (n-1 of them)");
    }
    std::vector<double> inv_tau_sq(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(tau[i] > 0.0)) throw std::invalid_argument("ar1_wlse: tau must be > 0");
        inv_tau_sq[i] = 1.0 / (tau[i] * tau[i]);
    }
    const auto& ops = kernels::active();
    const double num = ops.triple_dot(inv_tau_sq.data(), v.data() + 1, v.data(), m);
    const double den = ops.weighted_sum_sq(inv_tau_sq.data(), v.data(), m);
    if (!(den > 0.0)) {
        throw std::invalid_argument("ar1_wlse: all lagged values are zero");
    }
    EstimatorResult result;
    result.estimate = {num / den};
    double sse = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = v[i + 1] - result.estimate[0] * v[i];
        sse += inv_tau_sq[i] * r * r;
    }
    result.objective = sse;
    result.converged = true;
    return result;
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
    if (values.empty() || values.size() != weights.size()) {
        throw std::invalid_argument("weighted_median: need equally sized, non-empty inputs");
    }
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw std::invalid_argument("weighted_median: weights must be finite and >= 0");
        }
        total += w;
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("weighted_median: all weights are zero");
    }

    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    const double half = total / 2.0;
    double below = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        // Aggregate ties so repeated values act as one candidate.
        const double v = values[order[i]];
        double at = 0.0;
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == v) {
            at += weights[order[j]];
            ++j;
        }
        const double above = total - below - at;
        if (below <= half && above <= half) return v;
        below += at;
        i = j;
    }
    throw std::logic_error("weighted_median: scan exhausted without a qualifying value");
}

namespace {

struct LadCandidates {
    std::vector<double> ratios;
    std::vector<double> weights;
};

// Slope ratios X_t / X_{t-1} with the given per-pair base weights; zero-lag
// pairs contribute constants to the objective and are skipped.
LadCandidates lad_candidates(const processes::Series& series, std::span<const double> scale) {
    const auto& v = series.values;
    LadCandidates out;
    out.ratios.reserve(v.size() - 1);
    out.weights.reserve(v.size() - 1);
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i - 1] == 0.0) continue;
        const double w = scale.empty() ? 1.0 : scale[i - 1];
        out.ratios.push_back(v[i] / v[i - 1]);
        out.weights.push_back(std::fabs(v[i - 1]) * w);
    }
    if (out.ratios.empty()) {
        throw std::invalid_argument("LAD: all lagged values are zero");
    }
    return out;
}

EstimatorResult lad_from_candidates(const processes::Series& series, const LadCandidates& cand,
                                    std::span<const double> inv_tau) {
    EstimatorResult result;
    result.estimate = {weighted_median(cand.ratios, cand.weights)};
    const auto& v = series.values;
    const std::size_t m = v.size() - 1;
    const auto& ops = kernels::active();
    result.objective =
        inv_tau.empty()
            ? ops.abs_residual_sum(v.data() + 1, v.data(), result.estimate[0], m)
            : ops.weighted_abs_residual_sum(inv_tau.data(), v.data() + 1, v.data(),
                                            result.estimate[0], m);
    result.converged = true;
    return result;
}

}  // namespace

EstimatorResult ar1_lad(const processes::Series& series) {
    require_min_length(series, 2);
    return lad_from_candidates(series, lad_candidates(series, {}), {});
}

EstimatorResult ar1_wlad(const processes::Series& series, std::span<const double> tau) {
    require_min_length(series, 2);
    const std::size_t m = series.size() - 1;
    if (tau.size() != m) {
        throw std::invalid_argument("ar1_wlad: need one tau per summand (n-1 of them)");
    }
    std::vector<double> inv_tau(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(tau[i] > 0.0)) throw std::invalid_argument("ar1_wlad: tau must be > 0");
        inv_tau[i] = 1.0 / tau[i];
    }
    return lad_from_candidates(series, lad_candidates(series, inv_tau), inv_tau);
}

ArchVariant parse_arch_variant(const std::string& name) {
    if (name == "gaussian_nll" || name == "ml") return ArchVariant::gaussian_nll;
    if (name == "lade1") return ArchVariant::lade1;
    if (name == "lade2") return ArchVariant::lade2;
    if (name == "lade3") return ArchVariant::lade3;
    throw std::invalid_argument("unknown ARCH objective variant: " + name);
}

std::string arch_variant_name(ArchVariant variant) {
    switch (variant) {
        case ArchVariant::gaussian_nll: return "gaussian_nll";
        case ArchVariant::lade1: return "lade1";
        case ArchVariant::lade2: return "lade2";
        case ArchVariant::lade3: return "lade3";
    }
    return "?";
}

ArchObjective::ArchObjective(const processes::Series& series, std::size_t p, ArchVariant variant,
                             std::vector<double> weights)
    : p_(p), variant_(variant), weights_(std::move(weights)) {
    if (p == 0) throw std::invalid_argument("ARCH order must be >= 1");
    if (series.size() <= p) throw std::invalid_argument("series shorter than ARCH order + 1");
    const std::size_t summands = series.size() - p;
    if (!weights_.empty() && weights_.size() != summands) {
        throw std::invalid_argument("ArchObjective: one weight per summand required");
    }
    x_sq_.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        x_sq_[i] = series.values[i] * series.values[i];
    }
    if (variant_ == ArchVariant::lade2) {
        log_x_sq_.resize(series.size());
        for (std::size_t t = p; t < series.size(); ++t) {
            if (x_sq_[t] == 0.0) {
                throw std::domain_error(
                    "lade2: zero observation in the summation range (corrupted input?)");
            }
            log_x_sq_[t] = std::log(x_sq_[t]);
        }
    }
}

double ArchObjective::operator()(std::span<const double> theta) const {
    if (theta.size() != p_ + 1) {
        throw std::invalid_argument("ArchObjective: theta must be (c0, b_1..b_p)");
    }
    const double c0 = theta[0];
    double acc = 0.0;
    for (std::size_t t = p_; t < x_sq_.size(); ++t) {
        double sigma2 = c0;
        for (std::size_t j = 0; j < p_; ++j) {
            sigma2 += theta[j + 1] * x_sq_[t - 1 - j];
        }
        double term;
        switch (variant_) {
            case ArchVariant::gaussian_nll:
                term = std::log(sigma2) + x_sq_[t] / sigma2;
                break;
            case ArchVariant::lade1:
                term = std::fabs(x_sq_[t] / sigma2 - 1.0);
                break;
            case ArchVariant::lade2:
                term = std::fabs(log_x_sq_[t] - std::log(sigma2));
                break;
            case ArchVariant::lade3:
                term = std::fabs(x_sq_[t] - sigma2);
                break;
            default:
                term = kInf;
        }
        acc += weights_.empty() ? term : weights_[t - p_] * term;
    }
    return acc;
}

double arch_objective(std::span<const double> theta, const processes::Series& series,
                      ArchVariant variant) {
    if (theta.empty()) throw std::invalid_argument("theta must contain (c0, b...)");
    if (!(theta[0] > 0.0)) throw std::invalid_argument("c0 must be > 0");
    for (std::size_t j = 1; j < theta.size(); ++j) {
        if (theta[j] < 0.0) throw std::invalid_argument("b coefficients must be >= 0");
    }
    const ArchObjective objective(series, theta.size() - 1, variant);
    return objective(theta);
}

namespace {

// Unconstrained <-> constrained coordinates: log for c0, softplus for b_i.
double softplus(double y) {
    if (y > 30.0) return y;
    if (y < -30.0) return std::exp(y);
    return std::log1p(std::exp(y));
}

double softplus_inverse(double b) {
    if (b > 30.0) return b;
    return std::log(std::expm1(b));
}

std::vector<double> to_unconstrained(std::span<const double> params) {
    std::vector<double> y(params.size());
    y[0] = std::log(std::max(params[0], 1e-12));
    for (std::size_t j = 1; j < params.size(); ++j) {
        y[j] = softplus_inverse(std::max(params[j], 1e-8));
    }
    return y;
}

std::vector<double> to_constrained(std::span<const double> y) {
    std::vector<double> params(y.size());
    params[0] = std::exp(std::clamp(y[0], -700.0, 700.0));
    for (std::size_t j = 1; j < y.size(); ++j) {
        params[j] = softplus(std::clamp(y[j], -700.0, 700.0));
    }
    return params;
}

struct NelderMeadOutcome {
    std::vector<double> y;
    double value = kInf;
    bool converged = false;
    std::size_t evals = 0;
};

NelderMeadOutcome nelder_mead(const std::function<double(std::span<const double>)>& objective,
                              std::span<const double> y_init, double diameter_tol,
                              std::size_t max_evals) {
    const std::size_t dim = y_init.size();
    std::size_t evals = 0;
    auto eval = [&](std::span<const double> y) {
        ++evals;
        const auto params = to_constrained(y);
        const double f = objective(params);
        return std::isfinite(f) ? f : kInf;
    };

    std::vector<std::vector<double>> simplex(dim + 1, std::vector<double>(y_init.begin(),
                                                                          y_init.end()));
    std::vector<double> values(dim + 1);
    for (std::size_t i = 1; i <= dim; ++i) simplex[i][i - 1] += 0.25;
    for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= dim; ++i) {
            for (std::size_t k = 0; k < dim; ++k) {
                d = std::max(d, std::fabs(simplex[i][k] - simplex[0][k]));
            }
        }
        return d;
    };

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    bool converged = false;
    while (evals < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        {
            // Keep vertex 0 the incumbent best so the diameter check reads off it.
            std::vector<std::vector<double>> s2(dim + 1);
            std::vector<double> v2(dim + 1);
            for (std::size_t i = 0; i <= dim; ++i) {
                s2[i] = std::move(simplex[order[i]]);
                v2[i] = values[order[i]];
            }
            simplex = std::move(s2);
            values = std::move(v2);
        }
        if (diameter() < diameter_tol) {
            converged = true;
            break;
        }

        for (std::size_t k = 0; k < dim; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim; ++i) s += simplex[i][k];
            centroid[k] = s / static_cast<double>(dim);
        }
        const double f_best = values[0];
        const double f_second_worst = values[dim - 1];
        const double f_worst = values[dim];

        for (std::size_t k = 0; k < dim; ++k) trial[k] = centroid[k] + (centroid[k] - simplex[dim][k]);
        const double f_reflect = eval(trial);
        if (f_reflect < f_best) {
            for (std::size_t k = 0; k < dim; ++k) {
                trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[dim][k]);
            }
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[dim] = trial2;
                values[dim] = f_expand;
            } else {
                simplex[dim] = trial;
                values[dim] = f_reflect;
            }
        } else if (f_reflect < f_second_worst) {
            simplex[dim] = trial;
            values[dim] = f_reflect;
        } else {
            if (f_reflect < f_worst) {
                // Outside contraction.
                for (std::size_t k = 0; k < dim; ++k) {
                    trial2[k] = centroid[k] + 0.5 * (trial[k] - centroid[k]);
                }
                const double f_contract = eval(trial2);
                if (f_contract <= f_reflect) {
                    simplex[dim] = trial2;
                    values[dim] = f_contract;
                    continue;
                }
            } else {
                // Inside contraction.
                for (std::size_t k = 0; k < dim; ++k) {
                    trial2[k] = centroid[k] + 0.5 * (simplex[dim][k] - centroid[k]);
                }
                const double f_contract = eval(trial2);
                if (f_contract < f_worst) {
                    simplex[dim] = trial2;
                    values[dim] = f_contract;
                    continue;
                }
            }
            // Shrink toward the best vertex.
            for (std::size_t i = 1; i <= dim; ++i) {
                for (std::size_t k = 0; k < dim; ++k) {
                    simplex[i][k] = simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k]);
                }
                values[i] = eval(simplex[i]);
                if (evals >= max_evals) break;
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= dim; ++i) {
        if (values[i] < values[best]) best = i;
    }
    return {simplex[best], values[best], converged, evals};
}

}  // namespace

EstimatorResult minimize_box_positive(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> init, std::size_t restarts) {
    if (init.empty()) throw std::invalid_argument("minimize_box_positive: empty init");
    if (restarts == 0) restarts = 1;
    if (!(init[0] > 0.0)) throw std::invalid_argument("minimize_box_positive: need c0 > 0");
    for (std::size_t j = 1; j < init.size(); ++j) {
        if (init[j] < 0.0) throw std::invalid_argument("minimize_box_positive: need b >= 0");
    }

    const auto y_init = to_unconstrained(init);
    // Jitter for restarts comes from a fixed private seed, so reruns with the
    // same arguments retrace the same starts.
    rng::RngStream jitter_stream(0x6d696e626f785f31ULL);

    constexpr double kDiameterTol = 1e-8;
    constexpr std::size_t kMaxEvals = 10'000;

    EstimatorResult best;
    best.objective = kInf;
    bool any_finite_start = false;
    for (std::size_t r = 0; r < restarts; ++r) {
        std::vector<double> y = y_init;
        if (r > 0) {
            auto stream = jitter_stream.child(r);
            for (auto& value : y) value += 0.5 * stream.normal();
        }
        {
            const auto params = to_constrained(y);
            if (!std::isfinite(objective(params))) continue;
        }
        any_finite_start = true;
        auto outcome = nelder_mead(objective, y, kDiameterTol, kMaxEvals);
        best.iterations += outcome.evals;
        if (outcome.value < best.objective) {
            best.objective = outcome.value;
            best.estimate = to_constrained(outcome.y);
            best.converged = outcome.converged;
        }
    }
    if (!any_finite_start) {
        throw std::runtime_error("minimize_box_positive: objective not finite at any start");
    }
    best.restarts_used = restarts;
    return best;
}

EstimatorResult arch_fit_from(const processes::Series& series, std::size_t p,
                              ArchVariant variant, std::span<const double> init,
                              std::size_t restarts) {
    if (series.size() < p + 20) {
        throw std::invalid_argument("arch_fit: series shorter than the practical floor p + 20");
    }
    const ArchObjective objective(series, p, variant);
    return minimize_box_positive(
        [&objective](std::span<const double> theta) { return objective(theta); }, init, restarts);
}

EstimatorResult arch_fit(const processes::Series& series, std::size_t p, ArchVariant variant,
                         std::size_t restarts) {
    if (series.size() < p + 20) {
        throw std::invalid_argument("arch_fit: series shorter than the practical floor p + 20");
    }
    const auto& v = series.values;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size() - 1);

    std::vector<double> init(p + 1, 0.1);
    init[0] = std::max(var * (1.0 - 0.1 * static_cast<double>(p)), 1e-6);
    return arch_fit_from(series, p, variant, init, restarts);
}

AsymptoticLaw lse_limit(double theta) {
    if (!(std::fabs(theta) < 1.0)) throw std::invalid_argument("lse_limit: |theta| < 1 required");
    return {1.0 - theta * theta, "sqrt(n)", "ar1_lse"};
}

AsymptoticLaw lad_limit(double theta, const rng::ErrorDist& error) {
    if (!(std::fabs(theta) < 1.0)) throw std::invalid_argument("lad_limit: |theta| < 1 required");
    // 1 / (4 f^2(0) E X^2); with E X^2 = sigma^2/(1-theta^2) and f scaling as
    // 1/sigma the innovation scale cancels.
    const double f0 = error.density_at_zero();
    return {(1.0 - theta * theta) / (4.0 * f0 * f0), "sqrt(n)", "ar1_lad"};
}

namespace {

void check_hetero_limit_args(double theta) {
    if (!(std::fabs(theta) < 1.0)) throw std::invalid_argument("|theta| < 1 required");
    if (theta == 0.0) {
        throw std::invalid_argument(
            "theta = 0 is outside the hypotheses of the heteroscedastic limit laws");
    }
}

// Cesaro means of the martingale variance sums; g_t = theta^2 g_{t-1} + tau_t^2
// folds the inner geometric sum so the evaluation is O(n).
double s2_over_n_wlse(double theta, const processes::TauSchedule& tau, std::size_t n) {
    const double th2 = theta * theta;
    double g = 0.0;
    double acc = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double tau_t = tau.tau(t);
        const double tau_next = tau.tau(t + 1);
        g = th2 * g + tau_t * tau_t;
        acc += g / (tau_next * tau_next);
    }
    return acc / static_cast<double>(n);
}

double s2_over_n_lse(double theta, const processes::TauSchedule& tau, std::size_t n) {
    const double th2 = theta * theta;
    double g = 0.0;
    double acc = 0.0;
    for (std::size_t t = 1; t < n; ++t) {
        const double tau_t = tau.tau(t);
        const double tau_next = tau.tau(t + 1);
        g = th2 * g + tau_t * tau_t;
        acc += g * tau_next * tau_next;
    }
    return acc / static_cast<double>(n);
}

}  // namespace

AsymptoticLaw hetero_wlse_limit(double theta, const processes::TauSchedule& tau,
                                std::size_t eval_n) {
    check_hetero_limit_args(theta);
    const std::size_t n = std::min(eval_n, tau.horizon());
    if (n < 2) throw std::invalid_argument("tau schedule too short to evaluate the limit");
    const double limit = s2_over_n_wlse(theta, tau, n);
    if (!(limit > 0.0)) throw std::runtime_error("degenerate limit constant");
    return {1.0 / limit, "sqrt(n)", "hetero_wlse"};
}

AsymptoticLaw hetero_lse_limit(double theta, const processes::TauSchedule& tau,
                               std::size_t eval_n) {
    check_hetero_limit_args(theta);
    const std::size_t n = std::min(eval_n, tau.horizon());
    if (n < 2) throw std::invalid_argument("tau schedule too short to evaluate the limit");
    const double limit = s2_over_n_lse(theta, tau, n);
    double tau_bar_sq = 0.0;
    for (std::size_t t = 1; t <= n; ++t) {
        const double tau_t = tau.tau(t);
        tau_bar_sq += tau_t * tau_t;
    }
    tau_bar_sq /= static_cast<double>(n);
    const double one_minus = 1.0 - theta * theta;
    const double variance = limit * one_minus * one_minus / (tau_bar_sq * tau_bar_sq);
    return {variance, "sqrt(n)", "hetero_lse"};
}

AsymptoticLaw two_period_wb_limit(double theta, double sigma1_sq, double sigma2_sq) {
    if (!(std::fabs(theta) < 1.0)) throw std::invalid_argument("|theta| < 1 required");
    if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0)) {
        throw std::invalid_argument("variances must be > 0");
    }
    const double th2 = theta * theta;
    const double num = sigma1_sq * sigma2_sq +
                       th2 * (sigma1_sq * sigma1_sq + sigma2_sq * sigma2_sq) / 2.0;
    const double denom = (sigma1_sq + sigma2_sq) * (sigma1_sq + sigma2_sq);
    const double variance = 4.0 * (1.0 - th2) / (1.0 + th2) * num / denom;
    return {variance, "sqrt(n)", "two_period_weighted_bootstrap"};
}

}  // namespace tsboot::estimators
