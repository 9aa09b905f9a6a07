#include "tsboot/processes.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tsboot::processes {

void write_series_csv(const Series& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "t,x\n";
    char buf[64];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", series.values[i]);
        out << (i + 1) << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Series read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,x", 0) != 0) {
        throw std::runtime_error("series csv must start with header 't,x': " + path.string());
    }
    Series series;
    series.spec_tag = "csv:" + path.filename().string();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error("malformed series row: " + line);
        }
        series.values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (series.values.size() < 2) {
        throw std::runtime_error("series must contain at least 2 values: " + path.string());
    }
    return series;
}

namespace {

void check_stationary_theta(double theta) {
    if (!(std::fabs(theta) < 1.0)) {
        throw std::invalid_argument("AR(1) requires |theta| < 1");
    }
}

}  // namespace

Series simulate_ar1(const AR1Spec& spec, std::size_t n, rng::RngStream stream) {
    check_stationary_theta(spec.theta);
    if (spec.sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
    if (n < 2) throw std::invalid_argument("series length must be >= 2");

    Series series;
    series.spec_tag = "ar1(theta=" + std::to_string(spec.theta) + ",sigma=" +
                      std::to_string(spec.sigma) + "," + spec.error.name() + ")";
    series.values.resize(n);
    const double init_sd = spec.sigma / std::sqrt(1.0 - spec.theta * spec.theta);
    series.values[0] = init_sd * stream.normal();
    for (std::size_t t = 1; t < n; ++t) {
        series.values[t] =
            spec.theta * series.values[t - 1] + spec.sigma * spec.error.draw(stream);
    }
    return series;
}

Series simulate_hetero_ar1(const HeteroAR1Spec& spec, std::size_t n, rng::RngStream stream) {
    check_stationary_theta(spec.theta);
    if (n < 2) throw std::invalid_argument("series length must be >= 2");
    if (spec.tau.horizon() < n - 1) {
        throw std::invalid_argument("tau schedule shorter than requested series");
    }

    Series series;
    series.spec_tag = "hetero_ar1(theta=" + std::to_string(spec.theta) + ",tau=" +
                      spec.tau.name() + "," + spec.error.name() + ")";
    series.values.resize(n);
    const double tau1 = spec.tau.tau(1);
    series.values[0] = tau1 / std::sqrt(1.0 - spec.theta * spec.theta) * stream.normal();
    for (std::size_t t = 1; t < n; ++t) {
        const double tau_t = spec.tau.tau(t);
        if (!(tau_t > 0.0)) throw std::invalid_argument("tau schedule must stay positive");
        series.values[t] =
            spec.theta * series.values[t - 1] + tau_t * spec.error.draw(stream);
    }
    return series;
}

Series simulate_arch(const ArchSpec& spec, std::size_t n, std::size_t burn_in,
                     rng::RngStream stream) {
    if (!(spec.c0 > 0.0)) throw std::invalid_argument("ARCH needs c0 > 0");
    double b_sum = 0.0;
    for (double b : spec.b) {
        if (b < 0.0) throw std::invalid_argument("ARCH coefficients must be >= 0");
        b_sum += b;
    }
    if (!(b_sum < 1.0)) {
        throw std::invalid_argument("ARCH stationarity needs sum(b) < 1");
    }
    if (n < 2) throw std::invalid_argument("series length must be >= 2");

    const std::size_t p = spec.b.size();
    std::vector<double> x(p + burn_in + n, 0.0);  // presample zeros
    for (std::size_t t = p; t < x.size(); ++t) {
        double sigma2 = spec.c0;
        for (std::size_t j = 0; j < p; ++j) {
            sigma2 += spec.b[j] * x[t - 1 - j] * x[t - 1 - j];
        }
        x[t] = std::sqrt(sigma2) * spec.error.draw(stream);
    }

    Series series;
    series.spec_tag = "arch(c0=" + std::to_string(spec.c0) + ",p=" + std::to_string(p) + "," +
                      spec.error.name() + ")";
    series.values.assign(x.end() - static_cast<std::ptrdiff_t>(n), x.end());
    return series;
}

std::vector<double> arch_sigma2_path(std::span<const double> theta, const Series& series) {
    if (theta.empty()) throw std::invalid_argument("theta must contain (c0, b...)");
    const std::size_t p = theta.size() - 1;
    if (!(theta[0] > 0.0)) throw std::invalid_argument("c0 must be > 0");
    for (std::size_t j = 1; j < theta.size(); ++j) {
        if (theta[j] < 0.0) throw std::invalid_argument("b coefficients must be >= 0");
    }
    if (series.size() <= p) {
        throw std::invalid_argument("series shorter than ARCH order + 1");
    }
    const auto& x = series.values;
    std::vector<double> sigma2(series.size() - p);
    for (std::size_t t = p; t < series.size(); ++t) {
        double s = theta[0];
        for (std::size_t j = 0; j < p; ++j) {
            s += theta[j + 1] * x[t - 1 - j] * x[t - 1 - j];
        }
        sigma2[t - p] = s;
    }
    return sigma2;
}

TauSchedule TauSchedule::constant(double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
    return TauSchedule(Repr{Constant{tau}});
}

TauSchedule TauSchedule::two_period(double sigma1, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("sigmas must be > 0");
    return TauSchedule(Repr{TwoPeriod{sigma1, sigma2}});
}

TauSchedule TauSchedule::two_period_var(double sigma1_sq, double sigma2_sq) {
    if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0)) {
        throw std::invalid_argument("variances must be > 0");
    }
    return two_period(std::sqrt(sigma1_sq), std::sqrt(sigma2_sq));
}

TauSchedule TauSchedule::power(double c, double alpha) {
    if (!(c > 0.0)) throw std::invalid_argument("power schedule needs c > 0");
    return TauSchedule(Repr{Power{c, alpha}});
}

TauSchedule TauSchedule::explicit_values(std::vector<double> taus) {
    for (double t : taus) {
        if (!(t > 0.0)) throw std::invalid_argument("explicit taus must be > 0");
    }
    if (taus.empty()) throw std::invalid_argument("explicit schedule must be non-empty");
    return TauSchedule(Repr{Explicit{std::move(taus)}});
}

double TauSchedule::tau(std::size_t t) const {
    if (t == 0) throw std::invalid_argument("tau index starts at 1");
    if (const auto* c = std::get_if<Constant>(&repr_)) return c->tau;
    if (const auto* tp = std::get_if<TwoPeriod>(&repr_)) {
        return (t % 2 == 1) ? tp->sigma1 : tp->sigma2;
    }
    if (const auto* pw = std::get_if<Power>(&repr_)) {
        return std::sqrt(pw->c * std::pow(static_cast<double>(t), pw->alpha));
    }
    const auto& ex = std::get<Explicit>(repr_);
    if (t > ex.taus.size()) throw std::out_of_range("tau index beyond explicit schedule");
    return ex.taus[t - 1];
}

std::size_t TauSchedule::horizon() const {
    if (const auto* ex = std::get_if<Explicit>(&repr_)) return ex->taus.size();
    return std::numeric_limits<std::size_t>::max();
}

std::string TauSchedule::name() const {
    std::ostringstream out;
    if (const auto* c = std::get_if<Constant>(&repr_)) {
        out << "constant(" << c->tau << ")";
    } else if (const auto* tp = std::get_if<TwoPeriod>(&repr_)) {
        out << "two_period(" << tp->sigma1 * tp->sigma1 << "," << tp->sigma2 * tp->sigma2 << ")";
    } else if (const auto* pw = std::get_if<Power>(&repr_)) {
        out << "power(" << pw->c << "," << pw->alpha << ")";
    } else {
        out << "explicit(" << std::get<Explicit>(repr_).taus.size() << ")";
    }
    return out.str();
}

std::vector<double> TauSchedule::taus(std::size_t count) const {
    std::vector<double> out(count);
    for (std::size_t t = 1; t <= count; ++t) out[t - 1] = tau(t);
    return out;
}

}  // namespace tsboot::processes
