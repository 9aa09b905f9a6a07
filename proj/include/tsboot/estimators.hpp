#pragma once

#include "tsboot/processes.hpp"
#include "tsboot/rng.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tsboot::estimators {

struct EstimatorResult {
    std::vector<double> estimate;
    double objective = 0.0;  // exact objective value at the estimate
    bool converged = false;
    std::size_t iterations = 0;  // objective evaluations (0 for closed forms)
    std::size_t restarts_used = 0;
};

/// theta_hat = sum X_t X_{t-1} / sum X_{t-1}^2. The objective reported is the
/// least-squares criterion at the estimate.
EstimatorResult ar1_lse(const processes::Series& series);

/// Weighted least squares with known innovation scales: weights 1/tau_t^2,
/// one per summand (tau.size() == series.size() - 1).
EstimatorResult ar1_wlse(const processes::Series& series, std::span<const double> tau);

/// Exact minimizer of sum_i w_i |v_i - m| over m: the smallest value v such
/// that the weight below v and the weight above v are both <= W/2. Ties on a
/// flat minimum resolve to the left endpoint.
double weighted_median(std::span<const double> values, std::span<const double> weights);

/// LAD autoregression: minimizes sum |X_t - theta X_{t-1}| exactly as the
/// weighted median of the slope ratios X_t / X_{t-1} with weights |X_{t-1}|.
/// Pairs with X_{t-1} = 0 contribute a theta-independent constant and are
/// dropped from the candidate set.
EstimatorResult ar1_lad(const processes::Series& series);

/// Scale-weighted LAD: minimizes sum (1/tau_t) |X_t - theta X_{t-1}|.
EstimatorResult ar1_wlad(const processes::Series& series, std::span<const double> tau);

enum class ArchVariant { gaussian_nll, lade1, lade2, lade3 };

ArchVariant parse_arch_variant(const std::string& name);
std::string arch_variant_name(ArchVariant variant);

/// Exact ARCH objective over t = p..size-1 (theta = (c0, b_1..b_p)):
///   gaussian_nll: sum log sigma_t^2 + X_t^2 / sigma_t^2
///   lade1:        sum |X_t^2 / sigma_t^2 - 1|
///   lade2:        sum |log X_t^2 - log sigma_t^2|
///   lade3:        sum |X_t^2 - sigma_t^2|
/// lade2 throws std::domain_error on a zero observation in the summation
/// range: under a continuous error law that has probability zero, so it
/// signals corrupted input rather than being skipped silently.
double arch_objective(std::span<const double> theta, const processes::Series& series,
                      ArchVariant variant);

/// Precomputed-state form of the objective for solvers and the weighted
/// bootstrap. An empty weight vector means unweighted; otherwise one weight
/// per summand (size() - p of them).
class ArchObjective {
public:
    ArchObjective(const processes::Series& series, std::size_t p, ArchVariant variant,
                  std::vector<double> weights = {});
    double operator()(std::span<const double> theta) const;
    std::size_t dim() const { return p_ + 1; }

private:
    std::size_t p_;
    ArchVariant variant_;
    std::vector<double> x_sq_;      // squares of the observed series
    std::vector<double> log_x_sq_;  // only for lade2
    std::vector<double> weights_;
};

/// Derivative-free minimization over c0 > 0, b_i >= 0.
///
/// Runs Nelder-Mead in unconstrained coordinates (log for the first
/// component, inverse-softplus for the rest), `restarts` starts in total: the
/// first at `init`, the remainder jittered deterministically. Each start
/// stops when the simplex diameter falls below 1e-8 or after 1e4 objective
/// evaluations; the best terminal point wins. Derivative-free because the
/// absolute-deviation objectives are non-smooth.
EstimatorResult minimize_box_positive(
    const std::function<double(std::span<const double>)>& objective,
    std::span<const double> init, std::size_t restarts = 5);

/// Fits an ARCH(p) model by minimize_box_positive on the chosen objective.
/// Default initialization: c0 = sample variance * (1 - 0.1 p), b_i = 0.1.
EstimatorResult arch_fit(const processes::Series& series, std::size_t p, ArchVariant variant,
                         std::size_t restarts = 5);
EstimatorResult arch_fit_from(const processes::Series& series, std::size_t p,
                              ArchVariant variant, std::span<const double> init,
                              std::size_t restarts);

struct AsymptoticLaw {
    double variance = 0.0;
    std::string rate = "sqrt(n)";
    std::string source;
};

/// Homoscedastic least squares: N(0, 1 - theta^2).
AsymptoticLaw lse_limit(double theta);

/// Homoscedastic LAD: N(0, 1/(4 f^2(0) E X_t^2)). Scale-free in sigma; `error`
/// is the unit-variance innovation law.
AsymptoticLaw lad_limit(double theta, const rng::ErrorDist& error);

/// Weighted LSE under a deterministic tau schedule: N(0, theta^2 / rho^2).
/// The limit constant is evaluated numerically as the Cesaro mean of the
/// defining variance sums at `eval_n` terms (the closed-form display is not
/// used). theta = 0 is outside the limit law's hypotheses.
AsymptoticLaw hetero_wlse_limit(double theta, const processes::TauSchedule& tau,
                                std::size_t eval_n = 1'000'000);

/// Plain LSE under a deterministic tau schedule:
/// N(0, rho^2 (1-theta^2)^2 / (tau_bar^4 theta^2)), constants evaluated
/// numerically as above.
AsymptoticLaw hetero_lse_limit(double theta, const processes::TauSchedule& tau,
                               std::size_t eval_n = 1'000'000);

/// Weighted-bootstrap LSE pivot limit for the two-period schedule
/// (variance parameters sigma1_sq, sigma2_sq):
///   4 (1-theta^2)/(1+theta^2) * (s1 s2 + theta^2 (s1^2 + s2^2)/2) / (s1+s2)^2.
AsymptoticLaw two_period_wb_limit(double theta, double sigma1_sq, double sigma2_sq);

}  // namespace tsboot::estimators
