// tsboot: simulate the models, fit the estimators, run the bootstrap
// experiments from JSON configs, and compare pivot samples with a KS test.
#include "tsboot/bootstrap.hpp"
#include "tsboot/estimators.hpp"
#include "tsboot/harness.hpp"
#include "tsboot/kernels.hpp"
#include "tsboot/processes.hpp"
#include "tsboot/stats.hpp"
#include "tsboot/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using tsboot::processes::Series;

void print_estimate(const std::string& name, const tsboot::estimators::EstimatorResult& fit,
                    const std::vector<std::string>& params) {
    std::printf("estimator: %s\n", name.c_str());
    for (std::size_t j = 0; j < fit.estimate.size(); ++j) {
        std::printf("%s = %.17g\n", params[j].c_str(), fit.estimate[j]);
    }
    std::printf("objective = %.17g\nconverged = %s\nevaluations = %zu\nrestarts = %zu\n",
                fit.objective, fit.converged ? "true" : "false", fit.iterations,
                fit.restarts_used);
}

std::vector<double> pivot_column(const std::string& file, const std::string& param) {
    const auto sample = tsboot::bootstrap::read_pivot_csv(file);
    if (sample.params.size() == 1) return sample.draws[0];
    if (param.empty()) {
        throw std::runtime_error(file + " holds several parameters; pick one with --param");
    }
    for (std::size_t j = 0; j < sample.params.size(); ++j) {
        if (sample.params[j] == param) return sample.draws[j];
    }
    throw std::runtime_error("parameter '" + param + "' not found in " + file);
}

std::vector<double> load_sample(const std::string& file, const std::string& param) {
    // Pivot CSVs carry a replicate,param,pivot header; series CSVs carry t,x.
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open: " + file);
    std::string header;
    std::getline(in, header);
    in.close();
    if (header == "replicate,param,pivot") return pivot_column(file, param);
    if (header.rfind("t,x", 0) == 0) return tsboot::processes::read_series_csv(file).values;
    throw std::runtime_error("unrecognized csv header in " + file +
                             " (expected 'replicate,param,pivot' or 't,x')");
}

int run_main(const std::string& config_path, unsigned threads, bool fresh_series) {
    auto config = tsboot::harness::load_config(config_path);
    if (fresh_series) config.fresh_series_per_replicate = true;
    const unsigned workers = tsboot::harness::resolve_threads(threads);
    auto report = tsboot::harness::run_experiment(config, workers);
    tsboot::harness::emit_report(report, tsboot::harness::ReportFormat::csv);
    tsboot::harness::emit_report(report, tsboot::harness::ReportFormat::markdown);
    std::printf("experiment %s done in %.2fs (%u workers); report in %s\n",
                report.experiment.c_str(), report.wall_seconds, workers,
                report.output_dir.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-series bootstrap experiments"};
    app.fallthrough();  // global flags may follow the subcommand
    app.set_version_flag("--version", std::string("tsboot ") + tsboot::kVersion + " (kernels: " +
                                          tsboot::kernels::active_name() + ")");
    unsigned threads = 0;  // 0 = machine parallelism
    app.add_option("--threads", threads,
                   "worker count (TSBOOT_THREADS overrides; never changes results)");

    // run
    auto* run = app.add_subcommand("run", "run an experiment config");
    std::string config_path;
    bool fresh_series = false;
    run->add_option("config", config_path, "experiment JSON")->required();
    run->add_flag("--fresh-series-per-replicate", fresh_series,
                  "sensitivity mode: each bootstrap replicate conditions on a fresh series");

    // ks
    auto* ks = app.add_subcommand("ks", "two-sample KS test between two csv samples");
    std::string ks_a;
    std::string ks_b;
    std::string ks_param;
    ks->add_option("a", ks_a, "first sample csv")->required();
    ks->add_option("b", ks_b, "second sample csv")->required();
    ks->add_option("--param", ks_param, "parameter name for multi-parameter pivot files");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "simulate a model and write a series csv");
    std::string sim_model;
    std::size_t sim_n = 100;
    std::uint64_t sim_seed = 1;
    std::string sim_out;
    std::string sim_error = "normal";
    double sim_theta = 0.5;
    double sim_sigma = 1.0;
    std::optional<double> sim_s1_sq;
    std::optional<double> sim_s2_sq;
    std::optional<double> sim_tau_c;
    std::optional<double> sim_tau_alpha;
    double sim_c0 = 1.0;
    std::vector<double> sim_b;
    std::size_t sim_burn_in = tsboot::processes::kDefaultArchBurnIn;
    simulate->add_option("model", sim_model, "ar1 | hetero_ar1 | arch")->required();
    simulate->add_option("--n", sim_n, "series length")->required();
    simulate->add_option("--seed", sim_seed, "master seed")->required();
    simulate->add_option("--out", sim_out, "output csv")->required();
    simulate->add_option("--error", sim_error, "normal | t3 | t4 | laplace");
    simulate->add_option("--theta", sim_theta, "AR coefficient");
    simulate->add_option("--sigma", sim_sigma, "ar1 innovation scale");
    simulate->add_option("--sigma1-sq", sim_s1_sq, "odd-index innovation variance");
    simulate->add_option("--sigma2-sq", sim_s2_sq, "even-index innovation variance");
    simulate->add_option("--tau-power-c", sim_tau_c, "power schedule c (tau_t^2 = c t^alpha)");
    simulate->add_option("--tau-power-alpha", sim_tau_alpha, "power schedule alpha");
    simulate->add_option("--c0", sim_c0, "ARCH intercept");
    simulate->add_option("--b", sim_b, "ARCH coefficients b_1..b_p");
    simulate->add_option("--burn-in", sim_burn_in, "ARCH burn-in");

    // fit
    auto* fit = app.add_subcommand("fit", "fit an estimator to a series csv");
    std::string fit_name;
    std::string fit_series;
    std::optional<double> fit_tau;
    std::optional<double> fit_s1_sq;
    std::optional<double> fit_s2_sq;
    std::size_t fit_p = 1;
    std::size_t fit_restarts = 5;
    fit->add_option("estimator", fit_name,
                    "lse | lad | wlse | wlad | arch_ml | arch_lade1 | arch_lade2 | arch_lade3")
        ->required();
    fit->add_option("series", fit_series, "series csv")->required();
    fit->add_option("--tau", fit_tau, "constant tau for wlse/wlad");
    fit->add_option("--sigma1-sq", fit_s1_sq, "two-period tau: odd variance");
    fit->add_option("--sigma2-sq", fit_s2_sq, "two-period tau: even variance");
    fit->add_option("--p", fit_p, "ARCH order");
    fit->add_option("--restarts", fit_restarts, "solver restarts for ARCH fits");

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_main(config_path, threads, fresh_series);

        if (*ks) {
            const auto a = load_sample(ks_a, ks_param);
            const auto b = load_sample(ks_b, ks_param);
            const auto report = tsboot::stats::ks_two_sample(a, b);
            std::printf("n1 = %zu\nn2 = %zu\nks_value = %.17g\np_value = %.17g\n", report.n1,
                        report.n2, report.d_stat, report.p_value);
            return 0;
        }

        if (*simulate) {
            tsboot::rng::RngStream stream(sim_seed);
            const auto error = tsboot::rng::ErrorDist::parse(sim_error);
            Series series;
            if (sim_model == "ar1") {
                series = tsboot::processes::simulate_ar1({sim_theta, sim_sigma, error}, sim_n,
                                                         stream);
            } else if (sim_model == "hetero_ar1") {
                tsboot::processes::TauSchedule tau = tsboot::processes::TauSchedule::constant(1.0);
                if (sim_s1_sq && sim_s2_sq) {
                    tau = tsboot::processes::TauSchedule::two_period_var(*sim_s1_sq, *sim_s2_sq);
                } else if (sim_tau_c && sim_tau_alpha) {
                    tau = tsboot::processes::TauSchedule::power(*sim_tau_c, *sim_tau_alpha);
                }
                series = tsboot::processes::simulate_hetero_ar1({sim_theta, tau, error}, sim_n,
                                                                stream);
            } else if (sim_model == "arch") {
                if (sim_b.empty()) sim_b = {0.5};
                series = tsboot::processes::simulate_arch({sim_c0, sim_b, error}, sim_n,
                                                          sim_burn_in, stream);
            } else {
                throw std::runtime_error("unknown model: " + sim_model);
            }
            tsboot::processes::write_series_csv(series, sim_out);
            std::printf("wrote %zu observations (%s) to %s\n", series.size(),
                        series.spec_tag.c_str(), sim_out.c_str());
            return 0;
        }

        if (*fit) {
            const auto series = tsboot::processes::read_series_csv(fit_series);
            auto taus = [&]() -> std::vector<double> {
                const std::size_t count = series.size() - 1;
                if (fit_s1_sq && fit_s2_sq) {
                    return tsboot::processes::TauSchedule::two_period_var(*fit_s1_sq, *fit_s2_sq)
                        .taus(count);
                }
                return tsboot::processes::TauSchedule::constant(fit_tau.value_or(1.0))
                    .taus(count);
            };
            if (fit_name == "lse") {
                print_estimate(fit_name, tsboot::estimators::ar1_lse(series), {"theta"});
            } else if (fit_name == "lad") {
                print_estimate(fit_name, tsboot::estimators::ar1_lad(series), {"theta"});
            } else if (fit_name == "wlse") {
                print_estimate(fit_name, tsboot::estimators::ar1_wlse(series, taus()), {"theta"});
            } else if (fit_name == "wlad") {
                print_estimate(fit_name, tsboot::estimators::ar1_wlad(series, taus()), {"theta"});
            } else if (fit_name.rfind("arch_", 0) == 0) {
                const auto variant =
                    tsboot::estimators::parse_arch_variant(fit_name.substr(5));
                const auto result =
                    tsboot::estimators::arch_fit(series, fit_p, variant, fit_restarts);
                std::vector<std::string> names{"c0"};
                for (std::size_t j = 1; j <= fit_p; ++j) names.push_back("b" + std::to_string(j));
                print_estimate(fit_name, result, names);
            } else {
                throw std::runtime_error("unknown estimator: " + fit_name);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
