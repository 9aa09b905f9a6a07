#pragma once

#include "tsboot/rng.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace tsboot::processes {

/// An observed sample path plus a note on where it came from.
struct Series {
    std::vector<double> values;
    std::string spec_tag;

    std::size_t size() const { return values.size(); }
};

/// Writes `t,x` rows, t counting from 1; values at 17 significant digits so
/// the file round-trips bit-exactly.
void write_series_csv(const Series& series, const std::filesystem::path& path);
Series read_series_csv(const std::filesystem::path& path);

struct AR1Spec {
    double theta = 0.0;
    double sigma = 1.0;  // 0 is allowed so noise-free fixtures exist
    rng::ErrorDist error = rng::ErrorDist::standard_normal();
};

/// Deterministic innovation-scale schedules tau_t, t >= 1.
class TauSchedule {
public:
    static TauSchedule constant(double tau);
    /// tau_t = sigma1 for odd t, sigma2 for even t (arguments are standard
    /// deviations; see two_period_var for the variance parameterization).
    static TauSchedule two_period(double sigma1, double sigma2);
    static TauSchedule two_period_var(double sigma1_sq, double sigma2_sq);
    /// tau_t^2 = c * t^alpha.
    static TauSchedule power(double c, double alpha);
    static TauSchedule explicit_values(std::vector<double> taus);

    /// tau_t for model index t >= 1.
    double tau(std::size_t t) const;
    /// Number of indices covered; unbounded schedules return SIZE_MAX.
    std::size_t horizon() const;
    std::string name() const;

    /// Materializes tau_1..tau_count.
    std::vector<double> taus(std::size_t count) const;

private:
    struct Constant { double tau; };
    struct TwoPeriod { double sigma1; double sigma2; };
    struct Power { double c; double alpha; };
    struct Explicit { std::vector<double> taus; };
    using Repr = std::variant<Constant, TwoPeriod, Power, Explicit>;
    explicit TauSchedule(Repr repr) : repr_(std::move(repr)) {}
    Repr repr_;
};

struct HeteroAR1Spec {
    double theta = 0.0;
    TauSchedule tau = TauSchedule::constant(1.0);
    rng::ErrorDist error = rng::ErrorDist::standard_normal();
};

struct ArchSpec {
    double c0 = 1.0;
    std::vector<double> b;  // nonnegative; sum < 1 for stationary simulation
    rng::ErrorDist error = rng::ErrorDist::standard_normal();
};

/// Stationary AR(1) draw of length n. The first element is the initial state,
/// sampled N(0, sigma^2/(1-theta^2)) so no burn-in is needed; the recursion
/// X_t = theta X_{t-1} + sigma e_t fills the rest. That initial law is exact
/// only under normal errors, which is fine for the limit theory (it holds
/// without stationarity).
Series simulate_ar1(const AR1Spec& spec, std::size_t n, rng::RngStream stream);

/// Heteroscedastic AR(1): Z_t = tau_t e_t with a deterministic schedule.
/// Initialization X_0 ~ N(0, tau_1^2/(1-theta^2)) is a documented convention;
/// with a constant schedule the output is bit-identical to simulate_ar1.
Series simulate_hetero_ar1(const HeteroAR1Spec& spec, std::size_t n, rng::RngStream stream);

/// ARCH(p) draw: presample zeros, then the recursion, with the first
/// `burn_in` values discarded (no closed-form stationary law exists).
Series simulate_arch(const ArchSpec& spec, std::size_t n, std::size_t burn_in,
                     rng::RngStream stream);

inline constexpr std::size_t kDefaultArchBurnIn = 500;

/// Conditional variance path sigma_t^2 = c0 + sum_j b_j X_{t-j}^2 for
/// t = p..size-1 (0-based), given observed values. `theta` is (c0, b_1..b_p).
std::vector<double> arch_sigma2_path(std::span<const double> theta, const Series& series);

}  // namespace tsboot::processes
