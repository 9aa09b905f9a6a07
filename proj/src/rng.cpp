#include "tsboot/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tsboot::rng {

namespace {

// splitmix64 finalizer (Vigna). Fixed forever: derived streams are part of
// the reproducibility contract.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t master_seed) : master_seed_(master_seed) { reseed(); }

RngStream::RngStream(std::uint64_t master_seed, std::span<const std::uint64_t> path)
    : master_seed_(master_seed), path_(path.begin(), path.end()) {
    reseed();
}

RngStream RngStream::child(std::uint64_t index) const {
    RngStream derived(*this);
    derived.path_.push_back(index);
    derived.reseed();
    return derived;
}

void RngStream::reseed() {
    std::uint64_t h = mix64(master_seed_ ^ 0x7473626f6f742d31ULL);  // "tsboot-1"
    for (std::uint64_t element : path_) {
        h = mix64(h ^ mix64(element));
    }
    // xoshiro256** seeding: four successive splitmix64 outputs.
    std::uint64_t s = h;
    for (auto& word : state_) {
        s = mix64(s);
        word = s;
    }
    has_cached_normal_ = false;
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256** step.
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be >= 1");
    // Multiply-shift mapping; bias is < bound / 2^64, negligible here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // Box-Muller on (0,1] x [0,1); u1 is shifted off zero so log stays finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
}

ErrorDist ErrorDist::standard_normal() { return {ErrorKind::standard_normal, 0}; }

ErrorDist ErrorDist::student_t_standardized(int dof) {
    if (dof <= 2) {
        throw std::invalid_argument("student_t_standardized: needs dof >= 3 for unit variance");
    }
    return {ErrorKind::student_t_standardized, dof};
}

ErrorDist ErrorDist::double_exponential_unit() { return {ErrorKind::double_exponential_unit, 0}; }

ErrorDist ErrorDist::parse(const std::string& name) {
    if (name == "normal") return standard_normal();
    if (name == "laplace" || name == "double_exponential") return double_exponential_unit();
    if (name.size() > 1 && name[0] == 't') {
        const int dof = std::stoi(name.substr(1));
        return student_t_standardized(dof);
    }
    throw std::invalid_argument("unknown error distribution: " + name);
}

std::string ErrorDist::name() const {
    switch (kind_) {
        case ErrorKind::standard_normal: return "normal";
        case ErrorKind::student_t_standardized: return "t" + std::to_string(dof_);
        case ErrorKind::double_exponential_unit: return "laplace";
    }
    return "?";
}

double ErrorDist::draw(RngStream& stream) const {
    switch (kind_) {
        case ErrorKind::standard_normal:
            return stream.normal();
        case ErrorKind::student_t_standardized: {
            // t(d) = Z / sqrt(S/d), S = sum of d squared normals (d is a small
            // integer, so the chi-square is drawn exactly); then scaled to
            // variance 1.
            const double z = stream.normal();
            double s = 0.0;
            for (int i = 0; i < dof_; ++i) {
                const double g = stream.normal();
                s += g * g;
            }
            const double t = z / std::sqrt(s / dof_);
            return t * std::sqrt((dof_ - 2.0) / dof_);
        }
        case ErrorKind::double_exponential_unit: {
            // Inverse CDF of Laplace(0, 1/sqrt(2)): variance exactly 1.
            const double u = stream.uniform01() - 0.5;
            const double scale = 1.0 / std::numbers::sqrt2;
            return u >= 0.0 ? -scale * std::log1p(-2.0 * u) : scale * std::log1p(2.0 * u);
        }
    }
    throw std::logic_error("unreachable error kind");
}

double ErrorDist::density_at_zero() const {
    switch (kind_) {
        case ErrorKind::standard_normal:
            return 1.0 / std::sqrt(2.0 * std::numbers::pi);
        case ErrorKind::student_t_standardized: {
            const double d = dof_;
            const double t_at_zero = std::exp(std::lgamma((d + 1.0) / 2.0) - std::lgamma(d / 2.0)) /
                                     std::sqrt(d * std::numbers::pi);
            return t_at_zero / std::sqrt((d - 2.0) / d);
        }
        case ErrorKind::double_exponential_unit:
            return 1.0 / std::numbers::sqrt2;
    }
    throw std::logic_error("unreachable error kind");
}

double ErrorDist::median_of_square() const {
    switch (kind_) {
        case ErrorKind::standard_normal: {
            const double q = 0.6744897501960817;  // standard normal 0.75 quantile
            return q * q;
        }
        case ErrorKind::student_t_standardized: {
            const double q = student_t_quantile(0.75, dof_);
            return q * q * (dof_ - 2.0) / dof_;
        }
        case ErrorKind::double_exponential_unit: {
            // |X| ~ Exp(sqrt(2)), median |X| = ln(2)/sqrt(2).
            const double m = std::numbers::ln2 / std::numbers::sqrt2;
            return m * m;
        }
    }
    throw std::logic_error("unreachable error kind");
}

double draw_error(RngStream& stream, const ErrorDist& dist) { return dist.draw(stream); }

std::vector<double> resample_with_replacement(RngStream& stream, std::span<const double> values,
                                              std::size_t m) {
    if (values.empty()) throw std::invalid_argument("resample_with_replacement: empty input");
    if (m == 0) throw std::invalid_argument("resample_with_replacement: m must be >= 1");
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = values[stream.uniform_below(values.size())];
    }
    return out;
}

namespace {

// Continued fraction for the regularized incomplete beta (Numerical Recipes
// style Lentz iteration).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-15;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double incbeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double lbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - lbeta);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double x, int dof) {
    if (dof < 1) throw std::invalid_argument("student_t_cdf: dof must be >= 1");
    const double d = dof;
    const double ib = incbeta(d / 2.0, 0.5, d / (d + x * x));
    return x >= 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

double student_t_quantile(double p, int dof) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("student_t_quantile: p in (0,1)");
    double lo = -1.0;
    double hi = 1.0;
    while (student_t_cdf(lo, dof) > p) lo *= 2.0;
    while (student_t_cdf(hi, dof) < p) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (student_t_cdf(mid, dof) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace tsboot::rng
