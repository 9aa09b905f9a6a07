#pragma once

#include "tsboot/estimators.hpp"
#include "tsboot/processes.hpp"
#include "tsboot/rng.hpp"
#include "tsboot/weights.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsboot::bootstrap {

enum class PivotKind { monte_carlo, residual_bs, weighted_bs, mn_residual_bs };

std::string pivot_kind_name(PivotKind kind);

struct PivotMeta {
    std::size_t n = 0;           // length of the conditioning series
    std::size_t replicates = 0;  // retained replicate count
    std::string scheme;          // weight scheme / resampling description
    std::size_t rejected_rows = 0;       // weight rows redrawn inside replicates
    std::size_t dropped_replicates = 0;  // replicates excluded after failures
};

/// A bag of studentized-pivot draws, one vector per parameter.
struct PivotSample {
    std::vector<std::string> params;
    std::vector<std::vector<double>> draws;  // draws[param][replicate]
    PivotKind kind = PivotKind::monte_carlo;
    std::string pivot_def;
    PivotMeta meta;
};

/// Writes `replicate,param,pivot` rows at 17 significant digits.
void write_pivot_csv(const PivotSample& sample, const std::filesystem::path& path);
PivotSample read_pivot_csv(const std::filesystem::path& path);

/// Residual bootstrap of the AR(1) least-squares estimator.
///
/// Residuals of the LSE fit are standardized to mean 0 and mean-square 1 over
/// their count, resampled with replacement, and run back through the fitted
/// recursion starting from X*_1 = Z*_1; each replicate contributes the pivot
/// sqrt(n) (theta*_b - theta_hat). The normalization deliberately targets unit
/// variance rather than the model's sigma^2: the pivot is scale-free in theta,
/// so the choice is harmless and keeps the procedure parameter-free.
PivotSample ar1_residual_bootstrap(const processes::Series& series, std::size_t B,
                                   rng::RngStream stream, unsigned threads = 1);

/// Weighted bootstrap of the AR(1) least-squares estimator: per replicate one
/// exchangeable weight row perturbs both sums of the LSE ratio, and the
/// studentized pivot sqrt(n) (theta* - theta_hat) / sigma_n is recorded.
/// Replicates whose weighted denominator collapses below 1e-8 of the
/// unweighted one are redrawn and counted; a rejection rate above 1% aborts
/// (the scheme is unsuitable for the series).
PivotSample ar1_weighted_bootstrap(const processes::Series& series,
                                   const weights::WeightScheme& scheme, std::size_t B,
                                   rng::RngStream stream, unsigned threads = 1);

/// Weighted bootstrap of the AR(1) LAD estimator: minimizes
/// sum w_t |X_t - theta X_{t-1}| exactly as a weighted median. Weight rows
/// with negative entries are redrawn (the weighted median needs nonnegative
/// weights); if more than half the rows are rejected the scheme is refused --
/// use multinomial weights for LAD.
PivotSample ar1_weighted_lad_bootstrap(const processes::Series& series,
                                       const weights::WeightScheme& scheme, std::size_t B,
                                       rng::RngStream stream, unsigned threads = 1);

/// m-out-of-n residual bootstrap of the ARCH Gaussian-likelihood fit.
///
/// Standardized residuals of the fit are resampled and pushed through the
/// fitted volatility recursion (presample zeros plus a 50-step burn-in) to
/// produce series of length m; each replicate is refit (warm-started at the
/// original estimate, 2 restarts) and contributes sqrt(m)(theta*_j -
/// theta_hat_j)/tau_hat* per parameter, where tau_hat^2 is the fourth-moment
/// spread of the raw residuals. m = n gives the full-sample variant.
/// Replicates whose refit fails are dropped and counted; >5% drops abort.
PivotSample arch_mn_residual_bootstrap(const processes::Series& series, std::size_t p,
                                       std::size_t m, std::size_t B, rng::RngStream stream,
                                       unsigned threads = 1);

/// Weighted bootstrap for ARCH fits (Gaussian likelihood or lade2): each
/// replicate minimizes the weight-perturbed objective warm-started at the
/// original fit and contributes sqrt(n)(theta*_j - theta_hat_j)/sigma_n.
PivotSample arch_weighted_bootstrap(const processes::Series& series, std::size_t p,
                                    estimators::ArchVariant variant,
                                    const weights::WeightScheme& scheme, std::size_t B,
                                    rng::RngStream stream, unsigned threads = 1);

/// tau_hat^2 = mean(e^4) - mean(e^2)^2 of the raw ARCH residuals
/// e_t = X_t / sigma_t(theta_hat); the studentizer of the m-out-of-n pivots.
double arch_tau_hat_sq(const processes::Series& series, std::span<const double> theta_hat);

}  // namespace tsboot::bootstrap
