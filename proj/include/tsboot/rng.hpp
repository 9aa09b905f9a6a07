#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tsboot::rng {

/// Deterministic, splittable random stream.
///
/// A stream is identified by (master_seed, path); deriving `child(k)` appends
/// k to the path. The internal generator state is a pure function of that
/// identity, so identical derivations replay identical draws on any platform.
/// Derivation mixes each path element into the seed with the splitmix64
/// finalizer (mix version 1, fixed); the generator is xoshiro256**.
///
/// Streams are value types. Derive freely and hand one stream per concurrent
/// consumer; a single instance must not be shared across threads.
class RngStream {
public:
    explicit RngStream(std::uint64_t master_seed);
    RngStream(std::uint64_t master_seed, std::span<const std::uint64_t> path);

    [[nodiscard]] RngStream child(std::uint64_t index) const;

    std::uint64_t master_seed() const { return master_seed_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform01();
    /// Uniform integer in [0, bound); bound >= 1.
    std::uint64_t uniform_below(std::uint64_t bound);
    /// Standard normal via Box-Muller (the spare value is cached).
    double normal();

private:
    void reseed();

    std::uint64_t master_seed_ = 0;
    std::vector<std::uint64_t> path_;
    std::uint64_t state_[4] = {};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

enum class ErrorKind {
    standard_normal,
    student_t_standardized,  // t(d) scaled by sqrt((d-2)/d); needs d >= 3
    double_exponential_unit, // Laplace with variance 1
};

/// A zero-mean, unit-variance innovation law.
class ErrorDist {
public:
    static ErrorDist standard_normal();
    static ErrorDist student_t_standardized(int dof);  // throws if dof <= 2
    static ErrorDist double_exponential_unit();
    /// Parses "normal", "t<d>" (e.g. "t3"), "laplace".
    static ErrorDist parse(const std::string& name);

    ErrorKind kind() const { return kind_; }
    int dof() const { return dof_; }
    std::string name() const;

    double draw(RngStream& stream) const;

    /// Density of the law at 0 (enters the LAD limit variance).
    double density_at_zero() const;
    /// Median of the squared draw (the scale factor picked up by the ARCH
    /// absolute-deviation estimands).
    double median_of_square() const;

private:
    ErrorDist(ErrorKind kind, int dof) : kind_(kind), dof_(dof) {}
    ErrorKind kind_;
    int dof_;
};

double draw_error(RngStream& stream, const ErrorDist& dist);

/// m independent uniform picks from `values`, with replacement.
std::vector<double> resample_with_replacement(RngStream& stream, std::span<const double> values,
                                              std::size_t m);

/// CDF and quantile of the (unstandardized) Student t with integer dof,
/// via the regularized incomplete beta function.
double student_t_cdf(double x, int dof);
double student_t_quantile(double p, int dof);

}  // namespace tsboot::rng
