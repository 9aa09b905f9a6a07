#include "tsboot/harness.hpp"

#include "tsboot/estimators.hpp"
#include "tsboot/kernels.hpp"
#include "tsboot/parallel.hpp"
#include "tsboot/stats.hpp"
#include "tsboot/version.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

namespace tsboot::harness {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Fixed sub-stream indices per experiment; replicates derive from these.
enum StreamSlot : std::uint64_t {
    kFixedSeries = 0,
    kMonteCarlo = 1,
    kResidual = 2,
    kWeighted = 3,
    kWeightedLad = 4,
    kMnResidual = 5,
    kWeightedLade2 = 6,
    kFreshSeries = 8,
};

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

std::string cell_text(const Cell& cell) {
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    return fmt(std::get<double>(cell));
}

double require_number(const json& obj, const std::string& key) {
    if (!obj.contains(key)) throw std::invalid_argument("config: missing key '" + key + "'");
    if (!obj[key].is_number()) throw std::invalid_argument("config: '" + key + "' must be a number");
    return obj[key].get<double>();
}

std::size_t require_count(const json& obj, const std::string& key) {
    const double v = require_number(obj, key);
    if (v < 1 || v != std::floor(v)) {
        throw std::invalid_argument("config: '" + key + "' must be a positive integer");
    }
    return static_cast<std::size_t>(v);
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
        }
    }
}

}  // namespace

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::ar1_bootstrap_comparison: return "ar1_bootstrap_comparison";
        case ExperimentKind::hetero_bootstrap_comparison: return "hetero_bootstrap_comparison";
        case ExperimentKind::arch_estimator_comparison: return "arch_estimator_comparison";
        case ExperimentKind::arch_bootstrap_consistency: return "arch_bootstrap_consistency";
        case ExperimentKind::limit_law_check: return "limit_law_check";
    }
    return "?";
}

namespace {

ExperimentKind parse_experiment(const std::string& name) {
    for (auto kind : {ExperimentKind::ar1_bootstrap_comparison,
                      ExperimentKind::hetero_bootstrap_comparison,
                      ExperimentKind::arch_estimator_comparison,
                      ExperimentKind::arch_bootstrap_consistency,
                      ExperimentKind::limit_law_check}) {
        if (experiment_name(kind) == name) return kind;
    }
    throw std::invalid_argument("config: unknown experiment '" + name + "'");
}

void parse_model(const json& model, ExperimentConfig& config) {
    if (!model.is_object()) throw std::invalid_argument("config: 'model' must be an object");
    if (!model.contains("type") || !model["type"].is_string()) {
        throw std::invalid_argument("config: model needs a string 'type'");
    }
    config.model_type = model["type"].get<std::string>();
    if (config.model_type == "ar1") {
        reject_unknown_keys(model, {"type", "theta", "sigma", "error"}, "model");
        config.theta = require_number(model, "theta");
        config.sigma = model.contains("sigma") ? require_number(model, "sigma") : 1.0;
        if (model.contains("error")) config.error = rng::ErrorDist::parse(model["error"].get<std::string>());
    } else if (config.model_type == "hetero_ar1") {
        reject_unknown_keys(model,
                            {"type", "theta", "error", "sigma1_sq", "sigma2_sq", "tau",
                             "tau_power_c", "tau_power_alpha"},
                            "model");
        config.theta = require_number(model, "theta");
        if (model.contains("error")) config.error = rng::ErrorDist::parse(model["error"].get<std::string>());
        if (model.contains("sigma1_sq") || model.contains("sigma2_sq")) {
            config.sigma1_sq = require_number(model, "sigma1_sq");
            config.sigma2_sq = require_number(model, "sigma2_sq");
        } else if (model.contains("tau")) {
            config.tau_constant = require_number(model, "tau");
        } else if (model.contains("tau_power_c")) {
            config.tau_power_c = require_number(model, "tau_power_c");
            config.tau_power_alpha = require_number(model, "tau_power_alpha");
        } else {
            throw std::invalid_argument(
                "config: hetero_ar1 needs sigma1_sq/sigma2_sq, tau, or tau_power_c/alpha");
        }
    } else if (config.model_type == "arch") {
        reject_unknown_keys(model, {"type", "c0", "b", "error", "error_dists", "burn_in"},
                            "model");
        config.c0 = require_number(model, "c0");
        if (!model.contains("b") || !model["b"].is_array() || model["b"].empty()) {
            throw std::invalid_argument("config: arch model needs a non-empty 'b' array");
        }
        for (const auto& bj : model["b"]) config.b.push_back(bj.get<double>());
        if (model.contains("error")) config.error = rng::ErrorDist::parse(model["error"].get<std::string>());
        if (model.contains("error_dists")) {
            for (const auto& name : model["error_dists"]) {
                config.error_dists.push_back(rng::ErrorDist::parse(name.get<std::string>()));
            }
        }
        if (model.contains("burn_in")) config.burn_in = require_count(model, "burn_in");
    } else {
        throw std::invalid_argument("config: unknown model type '" + config.model_type + "'");
    }
}

}  // namespace

processes::TauSchedule ExperimentConfig::tau_schedule() const {
    if (sigma1_sq && sigma2_sq) {
        return processes::TauSchedule::two_period_var(*sigma1_sq, *sigma2_sq);
    }
    if (tau_constant) return processes::TauSchedule::constant(*tau_constant);
    if (tau_power_c) return processes::TauSchedule::power(*tau_power_c, *tau_power_alpha);
    throw std::logic_error("no tau schedule configured");
}

weights::WeightScheme ExperimentConfig::make_weight_scheme(std::size_t row_length) const {
    if (weight_scheme == "multinomial") return weights::WeightScheme::multinomial(row_length);
    if (weight_scheme == "normal") {
        return weights::WeightScheme::iid_normal(row_length, weight_sigma_sq);
    }
    throw std::invalid_argument("config: weight_scheme must be 'multinomial' or 'normal'");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
    reject_unknown_keys(doc,
                        {"experiment", "model", "n", "B", "mc_replicates", "m", "weight_scheme",
                         "weight_sigma_sq", "estimators", "master_seed", "output_dir",
                         "fresh_series_per_replicate"},
                        "config");

    ExperimentConfig config;
    if (!doc.contains("experiment") || !doc["experiment"].is_string()) {
        throw std::invalid_argument("config: missing 'experiment'");
    }
    config.experiment = parse_experiment(doc["experiment"]);
    if (!doc.contains("model")) throw std::invalid_argument("config: missing 'model'");
    parse_model(doc["model"], config);

    config.n = require_count(doc, "n");
    config.mc_replicates = require_count(doc, "mc_replicates");
    const bool needs_bootstrap = config.experiment != ExperimentKind::limit_law_check &&
                                 config.experiment != ExperimentKind::arch_estimator_comparison;
    if (doc.contains("B")) {
        config.B = require_count(doc, "B");
    } else if (needs_bootstrap) {
        throw std::invalid_argument("config: missing 'B'");
    }
    if (doc.contains("m")) config.m = require_count(doc, "m");
    if (doc.contains("weight_scheme")) {
        config.weight_scheme = doc["weight_scheme"].get<std::string>();
        if (config.weight_scheme != "multinomial" && config.weight_scheme != "normal") {
            throw std::invalid_argument("config: weight_scheme must be 'multinomial' or 'normal'");
        }
    }
    if (doc.contains("weight_sigma_sq")) {
        config.weight_sigma_sq = require_number(doc, "weight_sigma_sq");
        if (!(config.weight_sigma_sq > 0.0)) {
            throw std::invalid_argument("config: weight_sigma_sq must be > 0");
        }
    }
    if (doc.contains("estimators")) {
        if (!doc["estimators"].is_array()) {
            throw std::invalid_argument("config: 'estimators' must be an array of names");
        }
        for (const auto& e : doc["estimators"]) config.estimators.push_back(e.get<std::string>());
    }
    if (!doc.contains("master_seed") || !doc["master_seed"].is_number()) {
        throw std::invalid_argument("config: missing 'master_seed'");
    }
    config.master_seed = doc["master_seed"].get<std::uint64_t>();
    if (!doc.contains("output_dir") || !doc["output_dir"].is_string()) {
        throw std::invalid_argument("config: missing 'output_dir'");
    }
    config.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("fresh_series_per_replicate")) {
        config.fresh_series_per_replicate = doc["fresh_series_per_replicate"].get<bool>();
    }
    config.raw_json = json_text;
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

unsigned resolve_threads(unsigned cli_threads) {
    if (const char* env = std::getenv("TSBOOT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    if (cli_threads >= 1) return cli_threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

double average_absolute_error(const std::vector<std::array<double, 2>>& estimates,
                              double c0_true, double b1_true, std::size_t* excluded) {
    if (!(std::fabs(b1_true) > 0.0)) throw std::invalid_argument("true b1 must be nonzero");
    const double target = c0_true / b1_true;
    double acc = 0.0;
    std::size_t used = 0;
    std::size_t skipped = 0;
    for (const auto& est : estimates) {
        if (std::fabs(est[1]) < 1e-6) {
            ++skipped;
            continue;
        }
        acc += std::fabs(est[0] / est[1] - target);
        ++used;
    }
    if (excluded) *excluded = skipped;
    if (used == 0) throw std::runtime_error("average_absolute_error: all replicates excluded");
    return acc / static_cast<double>(used);
}

namespace {

struct RunContext {
    const ExperimentConfig& config;
    unsigned threads;
    ExperimentReport& report;
    std::filesystem::path out;

    void persist_pivots(const bootstrap::PivotSample& sample, const std::string& name) {
        const auto rel = std::filesystem::path("pivots") / (name + ".csv");
        bootstrap::write_pivot_csv(sample, out / rel);
        report.emitted_files.push_back(rel.generic_string());
        if (sample.meta.rejected_rows > 0 || sample.kind != bootstrap::PivotKind::monte_carlo) {
            report.exclusions[name + "_rejected_rows"] = sample.meta.rejected_rows;
        }
        report.exclusions[name + "_dropped_replicates"] = sample.meta.dropped_replicates;
    }

    void persist_density(const bootstrap::PivotSample& sample, const std::string& name) {
        for (std::size_t j = 0; j < sample.params.size(); ++j) {
            const auto& draws = sample.draws[j];
            if (draws.size() < 2) continue;
            const auto [lo, hi] = std::minmax_element(draws.begin(), draws.end());
            if (!(*hi > *lo)) continue;  // zero-variance sample has no density curve
            const auto curve = stats::kde_gaussian(draws);
            const std::string file_name = sample.params.size() == 1
                                              ? name
                                              : name + "_" + sample.params[j];
            const auto rel = std::filesystem::path("density") / (file_name + ".csv");
            stats::write_density_csv(curve, out / rel);
            report.emitted_files.push_back(rel.generic_string());
        }
    }
};

Table make_ks_table(const std::string& label_column) {
    Table table;
    table.name = "ks";
    table.columns = {label_column, "technique", "ks_value", "p_value", "n_mc", "n_bs"};
    return table;
}

void add_ks_row(Table& table, const std::string& label, const std::string& technique,
                std::span<const double> mc, std::span<const double> bs) {
    const auto ks = stats::ks_two_sample(mc, bs);
    table.rows.push_back({label, technique, ks.d_stat, ks.p_value,
                          static_cast<double>(ks.n1), static_cast<double>(ks.n2)});
}

Table make_moment_table() {
    Table table;
    table.name = "pivot_moments";
    table.columns = {"sample", "count", "mean", "var", "skew", "kurt", "q025", "median", "q975"};
    return table;
}

void add_moment_row(Table& table, const std::string& name, std::span<const double> draws) {
    if (draws.size() < 2) return;
    const auto s = stats::moment_summary(draws);
    table.rows.push_back({name, static_cast<double>(draws.size()), s.mean, s.var, s.skew, s.kurt,
                          s.q025, s.median, s.q975});
}

processes::Series simulate_ar_model(const ExperimentConfig& config, std::size_t n,
                                    rng::RngStream stream) {
    if (config.model_type == "ar1") {
        return processes::simulate_ar1({config.theta, config.sigma, config.error}, n, stream);
    }
    return processes::simulate_hetero_ar1({config.theta, config.tau_schedule(), config.error}, n,
                                          stream);
}

// --- ar1_bootstrap_comparison / hetero_bootstrap_comparison ----------------

void run_ar_bootstrap_comparison(RunContext& ctx) {
    const auto& config = ctx.config;
    const bool hetero = config.experiment == ExperimentKind::hetero_bootstrap_comparison;
    if (hetero && config.model_type != "hetero_ar1") {
        throw std::invalid_argument("hetero_bootstrap_comparison needs a hetero_ar1 model");
    }
    if (!hetero && config.model_type != "ar1") {
        throw std::invalid_argument("ar1_bootstrap_comparison needs an ar1 model");
    }
    std::vector<std::string> wanted = config.estimators;
    if (wanted.empty()) wanted = {"lse"};
    const bool with_lse = std::count(wanted.begin(), wanted.end(), "lse") > 0;
    const bool with_lad = std::count(wanted.begin(), wanted.end(), "lad") > 0;
    for (const auto& e : wanted) {
        if (e != "lse" && e != "lad") {
            throw std::invalid_argument("bootstrap comparison supports estimators lse, lad");
        }
    }
    if (hetero && with_lad) {
        throw std::invalid_argument("hetero_bootstrap_comparison studies the lse bootstraps");
    }

    rng::RngStream root(config.master_seed);
    const auto fixed = simulate_ar_model(config, config.n, root.child(kFixedSeries));
    processes::write_series_csv(fixed, ctx.out / "fixed_series.csv");
    ctx.report.emitted_files.push_back("fixed_series.csv");
    const double sqrt_n = std::sqrt(static_cast<double>(config.n));

    // Monte-Carlo reference distribution of V_n over fresh series.
    std::vector<double> mc_lse(config.mc_replicates);
    std::vector<double> mc_lad(with_lad ? config.mc_replicates : 0);
    {
        auto mc_root = root.child(kMonteCarlo);
        parallel::parallel_for(config.mc_replicates, ctx.threads, [&](std::size_t r) {
            const auto series = simulate_ar_model(config, config.n, mc_root.child(r));
            mc_lse[r] = sqrt_n * (estimators::ar1_lse(series).estimate[0] - config.theta);
            if (with_lad) {
                mc_lad[r] = sqrt_n * (estimators::ar1_lad(series).estimate[0] - config.theta);
            }
        });
    }

    bootstrap::PivotSample mc_sample;
    mc_sample.params = {"theta"};
    mc_sample.draws = {mc_lse};
    mc_sample.kind = bootstrap::PivotKind::monte_carlo;
    mc_sample.pivot_def = "sqrt(n)*(theta_hat - theta)";
    mc_sample.meta.n = config.n;
    mc_sample.meta.replicates = mc_lse.size();
    mc_sample.meta.scheme = "fresh series";
    ctx.persist_pivots(mc_sample, "mc_lse");
    ctx.persist_density(mc_sample, "mc_lse");

    const auto scheme = config.make_weight_scheme(config.n - 1);

    // Engines condition on the single fixed series unless the sensitivity
    // flag asks for one fresh series per replicate.
    auto run_engine = [&](auto&& engine, StreamSlot slot) {
        if (!config.fresh_series_per_replicate) {
            return engine(fixed, config.B, root.child(slot));
        }
        bootstrap::PivotSample merged;
        auto series_root = root.child(kFreshSeries);
        auto engine_root = root.child(slot);
        for (std::size_t r = 0; r < config.B; ++r) {
            const auto series = simulate_ar_model(config, config.n, series_root.child(r));
            auto one = engine(series, 1, engine_root.child(r));
            if (r == 0) {
                merged = one;
            } else {
                for (std::size_t j = 0; j < merged.draws.size(); ++j) {
                    merged.draws[j].insert(merged.draws[j].end(), one.draws[j].begin(),
                                           one.draws[j].end());
                }
                merged.meta.rejected_rows += one.meta.rejected_rows;
                merged.meta.dropped_replicates += one.meta.dropped_replicates;
            }
        }
        merged.meta.replicates = merged.draws.empty() ? 0 : merged.draws[0].size();
        merged.meta.scheme += " (fresh series per replicate)";
        return merged;
    };

    auto ks_table = make_ks_table("estimator");
    auto moments = make_moment_table();
    add_moment_row(moments, "mc_lse", mc_lse);

    if (with_lse) {
        const auto rb = run_engine(
            [&](const processes::Series& s, std::size_t B, rng::RngStream st) {
                return bootstrap::ar1_residual_bootstrap(s, B, st, ctx.threads);
            },
            kResidual);
        ctx.persist_pivots(rb, "rb_lse");
        ctx.persist_density(rb, "rb_lse");
        add_ks_row(ks_table, "lse", "RB", mc_lse, rb.draws[0]);
        add_moment_row(moments, "rb_lse", rb.draws[0]);

        const auto wb = run_engine(
            [&](const processes::Series& s, std::size_t B, rng::RngStream st) {
                return bootstrap::ar1_weighted_bootstrap(s, scheme, B, st, ctx.threads);
            },
            kWeighted);
        ctx.persist_pivots(wb, "wb_lse");
        ctx.persist_density(wb, "wb_lse");
        add_ks_row(ks_table, "lse", "WB", mc_lse, wb.draws[0]);
        add_moment_row(moments, "wb_lse", wb.draws[0]);
    }
    if (with_lad) {
        bootstrap::PivotSample mc_lad_sample = mc_sample;
        mc_lad_sample.draws = {mc_lad};
        mc_lad_sample.pivot_def = "sqrt(n)*(theta_lad_hat - theta)";
        ctx.persist_pivots(mc_lad_sample, "mc_lad");
        ctx.persist_density(mc_lad_sample, "mc_lad");
        add_moment_row(moments, "mc_lad", mc_lad);

        const auto wb_lad = run_engine(
            [&](const processes::Series& s, std::size_t B, rng::RngStream st) {
                return bootstrap::ar1_weighted_lad_bootstrap(s, scheme, B, st, ctx.threads);
            },
            kWeightedLad);
        ctx.persist_pivots(wb_lad, "wb_lad");
        ctx.persist_density(wb_lad, "wb_lad");
        add_ks_row(ks_table, "lad", "WB", mc_lad, wb_lad.draws[0]);
        add_moment_row(moments, "wb_lad", wb_lad.draws[0]);
    }

    Table estimates;
    estimates.name = "fixed_series_estimates";
    estimates.columns = {"estimator", "estimate"};
    if (with_lse) {
        estimates.rows.push_back({std::string("lse"), estimators::ar1_lse(fixed).estimate[0]});
    }
    if (with_lad) {
        estimates.rows.push_back({std::string("lad"), estimators::ar1_lad(fixed).estimate[0]});
    }

    ctx.report.tables.push_back(std::move(ks_table));
    ctx.report.tables.push_back(std::move(estimates));
    ctx.report.tables.push_back(std::move(moments));
}

// --- limit_law_check --------------------------------------------------------

void run_limit_law_check(RunContext& ctx) {
    const auto& config = ctx.config;
    const bool hetero = config.model_type == "hetero_ar1";
    if (config.model_type != "ar1" && !hetero) {
        throw std::invalid_argument("limit_law_check supports ar1 and hetero_ar1 models");
    }
    std::vector<std::string> wanted = config.estimators;
    if (wanted.empty()) wanted = hetero ? std::vector<std::string>{"wlse", "lse"}
                                        : std::vector<std::string>{"lse", "lad"};
    for (const auto& e : wanted) {
        const bool ok = hetero ? (e == "lse" || e == "wlse") : (e == "lse" || e == "lad");
        if (!ok) {
            throw std::invalid_argument("limit_law_check: no closed-form law for estimator '" +
                                        e + "' under this model");
        }
    }

    rng::RngStream root(config.master_seed);
    const double sqrt_n = std::sqrt(static_cast<double>(config.n));
    const auto taus = hetero ? config.tau_schedule().taus(config.n - 1) : std::vector<double>{};

    std::vector<std::vector<double>> pivots(wanted.size(),
                                            std::vector<double>(config.mc_replicates));
    auto mc_root = root.child(kMonteCarlo);
    parallel::parallel_for(config.mc_replicates, ctx.threads, [&](std::size_t r) {
        const auto series = simulate_ar_model(config, config.n, mc_root.child(r));
        for (std::size_t k = 0; k < wanted.size(); ++k) {
            double estimate;
            if (wanted[k] == "lse") {
                estimate = estimators::ar1_lse(series).estimate[0];
            } else if (wanted[k] == "lad") {
                estimate = estimators::ar1_lad(series).estimate[0];
            } else {  // wlse
                estimate = estimators::ar1_wlse(series, taus).estimate[0];
            }
            pivots[k][r] = sqrt_n * (estimate - config.theta);
        }
    });

    Table table;
    table.name = "limit_law";
    table.columns = {"estimator", "n", "replicates", "empirical_var", "analytic_var", "ratio"};
    auto moments = make_moment_table();
    for (std::size_t k = 0; k < wanted.size(); ++k) {
        bootstrap::PivotSample sample;
        sample.params = {"theta"};
        sample.draws = {pivots[k]};
        sample.kind = bootstrap::PivotKind::monte_carlo;
        sample.pivot_def = "sqrt(n)*(" + wanted[k] + " - theta)";
        sample.meta.n = config.n;
        sample.meta.replicates = pivots[k].size();
        sample.meta.scheme = "fresh series";
        ctx.persist_pivots(sample, "mc_" + wanted[k]);
        ctx.persist_density(sample, "mc_" + wanted[k]);
        add_moment_row(moments, "mc_" + wanted[k], pivots[k]);

        double analytic;
        if (!hetero && wanted[k] == "lse") {
            analytic = estimators::lse_limit(config.theta).variance;
        } else if (!hetero && wanted[k] == "lad") {
            analytic = estimators::lad_limit(config.theta, config.error).variance;
        } else if (wanted[k] == "wlse") {
            analytic = estimators::hetero_wlse_limit(config.theta, config.tau_schedule()).variance;
        } else {
            analytic = estimators::hetero_lse_limit(config.theta, config.tau_schedule()).variance;
        }
        const double empirical =
            pivots[k].size() >= 2 ? stats::moment_summary(pivots[k]).var : 0.0;
        table.rows.push_back({wanted[k], static_cast<double>(config.n),
                              static_cast<double>(config.mc_replicates), empirical, analytic,
                              empirical / analytic});
    }
    ctx.report.tables.push_back(std::move(table));
    ctx.report.tables.push_back(std::move(moments));
}

// --- arch_estimator_comparison ----------------------------------------------

void run_arch_estimator_comparison(RunContext& ctx) {
    const auto& config = ctx.config;
    if (config.model_type != "arch") {
        throw std::invalid_argument("arch_estimator_comparison needs an arch model");
    }
    if (config.b.size() != 1) {
        throw std::invalid_argument(
            "arch_estimator_comparison reports |c0/b1 - ratio| errors and needs p = 1");
    }
    auto dists = config.error_dists;
    if (dists.empty()) {
        dists = {rng::ErrorDist::standard_normal(), rng::ErrorDist::student_t_standardized(3),
                 rng::ErrorDist::student_t_standardized(4)};
    }
    std::vector<std::string> variants = config.estimators;
    if (variants.empty()) variants = {"ml", "lade1", "lade2", "lade3"};

    Table table;
    table.name = "average_error";
    table.columns = {"dist", "estimator", "avg_error", "used", "excluded", "failed_fits"};

    rng::RngStream root(config.master_seed);
    for (std::size_t d = 0; d < dists.size(); ++d) {
        processes::ArchSpec spec{config.c0, config.b, dists[d]};
        auto dist_root = root.child(kMonteCarlo).child(d);

        std::vector<processes::Series> series(config.mc_replicates);
        parallel::parallel_for(config.mc_replicates, ctx.threads, [&](std::size_t r) {
            series[r] = processes::simulate_arch(spec, config.n, config.burn_in,
                                                 dist_root.child(r));
        });

        for (const auto& variant_name : variants) {
            const auto variant = estimators::parse_arch_variant(variant_name);
            std::vector<std::array<double, 2>> estimates(config.mc_replicates,
                                                         {std::nan(""), std::nan("")});
            std::vector<std::uint8_t> failed(config.mc_replicates, 0);
            parallel::parallel_for(config.mc_replicates, ctx.threads, [&](std::size_t r) {
                try {
                    const auto fit = estimators::arch_fit(series[r], 1, variant);
                    estimates[r] = {fit.estimate[0], fit.estimate[1]};
                } catch (const std::exception&) {
                    failed[r] = 1;
                }
            });
            std::vector<std::array<double, 2>> kept;
            kept.reserve(config.mc_replicates);
            bootstrap::PivotSample raw;
            raw.params = {"c0", "b1"};
            raw.draws.resize(2);
            for (std::size_t r = 0; r < config.mc_replicates; ++r) {
                if (failed[r]) continue;
                kept.push_back(estimates[r]);
                raw.draws[0].push_back(estimates[r][0]);
                raw.draws[1].push_back(estimates[r][1]);
            }
            raw.kind = bootstrap::PivotKind::monte_carlo;
            raw.pivot_def = "raw_estimate";
            raw.meta.n = config.n;
            raw.meta.replicates = kept.size();
            raw.meta.scheme = dists[d].name() + "/" + variant_name;
            const std::string name = "estimates_" + dists[d].name() + "_" + variant_name;
            ctx.persist_pivots(raw, name);

            const std::size_t n_failed = std::count(failed.begin(), failed.end(),
                                                    std::uint8_t{1});
            std::size_t excluded = 0;
            const double err = average_absolute_error(kept, config.c0, config.b[0], &excluded);
            ctx.report.exclusions[name + "_ratio_excluded"] = excluded;
            ctx.report.exclusions[name + "_failed_fits"] = n_failed;
            table.rows.push_back({dists[d].name(), variant_name, err,
                                  static_cast<double>(kept.size() - excluded),
                                  static_cast<double>(excluded),
                                  static_cast<double>(n_failed)});
        }
    }
    ctx.report.tables.push_back(std::move(table));
}

// --- arch_bootstrap_consistency ---------------------------------------------

void run_arch_bootstrap_consistency(RunContext& ctx) {
    const auto& config = ctx.config;
    if (config.model_type != "arch") {
        throw std::invalid_argument("arch_bootstrap_consistency needs an arch model");
    }
    const std::size_t p = config.b.size();
    std::vector<std::string> wanted = config.estimators;
    if (wanted.empty()) wanted = {"ml", "lade2"};
    const bool with_ml = std::count(wanted.begin(), wanted.end(), "ml") > 0;
    const bool with_lade2 = std::count(wanted.begin(), wanted.end(), "lade2") > 0;
    for (const auto& e : wanted) {
        if (e != "ml" && e != "lade2") {
            throw std::invalid_argument("arch_bootstrap_consistency supports ml and lade2");
        }
    }
    const std::size_t m = config.m.value_or(std::max<std::size_t>(p + 20, config.n / 2));

    processes::ArchSpec spec{config.c0, config.b, config.error};
    rng::RngStream root(config.master_seed);
    const auto fixed = processes::simulate_arch(spec, config.n, config.burn_in,
                                                root.child(kFixedSeries));
    processes::write_series_csv(fixed, ctx.out / "fixed_series.csv");
    ctx.report.emitted_files.push_back("fixed_series.csv");
    const double sqrt_n = std::sqrt(static_cast<double>(config.n));

    // True centering for the lade2 pivots: the absolute-deviation estimand is
    // the model scaled by the median of the squared error.
    std::vector<double> truth_ml{config.c0};
    for (double bj : config.b) truth_ml.push_back(bj);
    const double med = config.error.median_of_square();
    std::vector<double> truth_lade2;
    for (double v : truth_ml) truth_lade2.push_back(v * med);

    const std::size_t n_params = p + 1;
    std::vector<std::string> params{"c0"};
    for (std::size_t j = 1; j <= p; ++j) params.push_back("b" + std::to_string(j));

    // Monte-Carlo pivots over fresh series: plain and tau-studentized for the
    // likelihood fit, plain for lade2.
    std::vector<std::vector<double>> mc_plain(n_params,
                                              std::vector<double>(config.mc_replicates));
    std::vector<std::vector<double>> mc_student(n_params,
                                                std::vector<double>(config.mc_replicates));
    std::vector<std::vector<double>> mc_lade2(n_params,
                                              std::vector<double>(config.mc_replicates));
    std::vector<std::uint8_t> mc_failed(config.mc_replicates, 0);
    {
        auto mc_root = root.child(kMonteCarlo);
        parallel::parallel_for(config.mc_replicates, ctx.threads, [&](std::size_t r) {
            try {
                const auto series = processes::simulate_arch(spec, config.n, config.burn_in,
                                                             mc_root.child(r));
                if (with_ml) {
                    const auto fit = estimators::arch_fit(
                        series, p, estimators::ArchVariant::gaussian_nll);
                    const double tau_sq = bootstrap::arch_tau_hat_sq(series, fit.estimate);
                    const double tau = std::sqrt(std::max(tau_sq, 1e-300));
                    for (std::size_t j = 0; j < n_params; ++j) {
                        const double diff = fit.estimate[j] - truth_ml[j];
                        mc_plain[j][r] = sqrt_n * diff;
                        mc_student[j][r] = sqrt_n * diff / tau;
                    }
                }
                if (with_lade2) {
                    const auto fit =
                        estimators::arch_fit(series, p, estimators::ArchVariant::lade2);
                    for (std::size_t j = 0; j < n_params; ++j) {
                        mc_lade2[j][r] = sqrt_n * (fit.estimate[j] - truth_lade2[j]);
                    }
                }
            } catch (const std::exception&) {
                mc_failed[r] = 1;
            }
        });
    }
    auto compact = [&](std::vector<std::vector<double>> raw, bootstrap::PivotKind kind,
                       const std::string& def) {
        bootstrap::PivotSample sample;
        sample.params = params;
        sample.kind = kind;
        sample.pivot_def = def;
        sample.draws.resize(n_params);
        for (std::size_t r = 0; r < config.mc_replicates; ++r) {
            if (mc_failed[r]) continue;
            for (std::size_t j = 0; j < n_params; ++j) {
                sample.draws[j].push_back(raw[j][r]);
            }
        }
        sample.meta.n = config.n;
        sample.meta.replicates = sample.draws[0].size();
        sample.meta.scheme = "fresh series";
        sample.meta.dropped_replicates = static_cast<std::size_t>(
            std::count(mc_failed.begin(), mc_failed.end(), std::uint8_t{1}));
        return sample;
    };

    auto ks_table = make_ks_table("estimate");
    auto moments = make_moment_table();
    const auto scheme = config.make_weight_scheme(config.n - p);

    if (with_ml) {
        const auto mc_plain_sample = compact(mc_plain, bootstrap::PivotKind::monte_carlo,
                                             "sqrt(n)*(theta_hat - theta)");
        const auto mc_student_sample = compact(mc_student, bootstrap::PivotKind::monte_carlo,
                                               "sqrt(n)*(theta_hat - theta)/tau_hat");
        ctx.persist_pivots(mc_plain_sample, "mc_ml_plain");
        ctx.persist_pivots(mc_student_sample, "mc_ml_student");
        for (std::size_t j = 0; j < n_params; ++j) {
            add_moment_row(moments, "mc_ml_plain_" + params[j], mc_plain_sample.draws[j]);
        }

        const auto wb = bootstrap::arch_weighted_bootstrap(
            fixed, p, estimators::ArchVariant::gaussian_nll, scheme, config.B,
            root.child(kWeighted), ctx.threads);
        ctx.persist_pivots(wb, "wb_ml");
        const auto rb_full = bootstrap::arch_mn_residual_bootstrap(
            fixed, p, config.n, config.B, root.child(kResidual), ctx.threads);
        ctx.persist_pivots(rb_full, "rb_full");
        const auto rb_mn = bootstrap::arch_mn_residual_bootstrap(
            fixed, p, m, config.B, root.child(kMnResidual), ctx.threads);
        ctx.persist_pivots(rb_mn, "rb_mn");

        for (std::size_t j = 0; j < n_params; ++j) {
            add_ks_row(ks_table, params[j] + "_ml", "WB", mc_plain_sample.draws[j], wb.draws[j]);
        }
        for (std::size_t j = 0; j < n_params; ++j) {
            add_ks_row(ks_table, params[j] + "_ml", "RB", mc_student_sample.draws[j],
                       rb_full.draws[j]);
        }
        for (std::size_t j = 0; j < n_params; ++j) {
            add_ks_row(ks_table, params[j] + "_ml", "RB(m/n)", mc_student_sample.draws[j],
                       rb_mn.draws[j]);
        }
        for (std::size_t j = 0; j < n_params; ++j) {
            add_moment_row(moments, "wb_ml_" + params[j], wb.draws[j]);
            add_moment_row(moments, "rb_full_" + params[j], rb_full.draws[j]);
            add_moment_row(moments, "rb_mn_" + params[j], rb_mn.draws[j]);
        }
    }
    if (with_lade2) {
        const auto mc_lade2_sample = compact(mc_lade2, bootstrap::PivotKind::monte_carlo,
                                             "sqrt(n)*(theta_lade2_hat - theta_lade2)");
        ctx.persist_pivots(mc_lade2_sample, "mc_lade2");
        const auto wb2 = bootstrap::arch_weighted_bootstrap(
            fixed, p, estimators::ArchVariant::lade2, scheme, config.B,
            root.child(kWeightedLade2), ctx.threads);
        ctx.persist_pivots(wb2, "wb_lade2");
        for (std::size_t j = 0; j < n_params; ++j) {
            add_ks_row(ks_table, params[j] + "_lade2", "WB", mc_lade2_sample.draws[j],
                       wb2.draws[j]);
            add_moment_row(moments, "wb_lade2_" + params[j], wb2.draws[j]);
        }
    }

    ctx.report.tables.push_back(std::move(ks_table));
    ctx.report.tables.push_back(std::move(moments));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport report;
    report.experiment = experiment_name(config.experiment);
    report.master_seed = config.master_seed;
    report.version = kVersion;
    report.output_dir = config.output_dir;
    report.config_echo = config.raw_json;
    report.degenerate_counts_warning = config.mc_replicates <= 1 || config.B == 1;

    if (config.output_dir.empty()) throw std::invalid_argument("config: empty output_dir");
    std::filesystem::create_directories(report.output_dir / "pivots");
    std::filesystem::create_directories(report.output_dir / "density");
    std::filesystem::create_directories(report.output_dir / "tables");

    RunContext ctx{config, threads, report, report.output_dir};
    switch (config.experiment) {
        case ExperimentKind::ar1_bootstrap_comparison:
        case ExperimentKind::hetero_bootstrap_comparison:
            run_ar_bootstrap_comparison(ctx);
            break;
        case ExperimentKind::limit_law_check:
            run_limit_law_check(ctx);
            break;
        case ExperimentKind::arch_estimator_comparison:
            run_arch_estimator_comparison(ctx);
            break;
        case ExperimentKind::arch_bootstrap_consistency:
            run_arch_bootstrap_consistency(ctx);
            break;
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void append_unique(std::vector<std::string>& files, const std::string& rel) {
    if (std::find(files.begin(), files.end(), rel) == files.end()) files.push_back(rel);
}

}  // namespace

void emit_report(ExperimentReport& report, ReportFormat format) {
    if (format == ReportFormat::csv) {
        for (const auto& table : report.tables) {
            std::string text;
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                text += (c ? "," : "") + table.columns[c];
            }
            text += '\n';
            for (const auto& row : table.rows) {
                for (std::size_t c = 0; c < row.size(); ++c) {
                    text += (c ? "," : "") + cell_text(row[c]);
                }
                text += '\n';
            }
            const auto rel = std::filesystem::path("tables") / (table.name + ".csv");
            write_text_file(report.output_dir / rel, text);
            append_unique(report.emitted_files, rel.generic_string());
        }
    } else {
        std::string text = "# " + report.experiment + "\n\n";
        text += "seed " + std::to_string(report.master_seed) + ", tsboot " + report.version +
                "\n";
        for (const auto& table : report.tables) {
            text += "\n## " + table.name + "\n\n|";
            for (const auto& col : table.columns) text += " " + col + " |";
            text += "\n|";
            for (std::size_t c = 0; c < table.columns.size(); ++c) text += " --- |";
            text += '\n';
            for (const auto& row : table.rows) {
                text += '|';
                for (const auto& cell : row) text += " " + cell_text(cell) + " |";
                text += '\n';
            }
        }
        write_text_file(report.output_dir / "report.md", text);
        append_unique(report.emitted_files, "report.md");
    }

    ordered_json manifest;
    manifest["version"] = report.version;
    manifest["experiment"] = report.experiment;
    manifest["master_seed"] = report.master_seed;
    manifest["kernel"] = kernels::active_name();
    manifest["config"] = ordered_json::parse(report.config_echo);
    manifest["warnings"] = report.degenerate_counts_warning
                               ? std::vector<std::string>{"degenerate_counts"}
                               : std::vector<std::string>{};
    ordered_json exclusions = ordered_json::object();
    for (const auto& [key, count] : report.exclusions) exclusions[key] = count;
    manifest["excluded_replicates"] = exclusions;
    ordered_json tables = ordered_json::array();
    for (const auto& table : report.tables) tables.push_back(table.name);
    manifest["tables"] = tables;
    manifest["files"] = report.emitted_files;
    write_text_file(report.output_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace tsboot::harness
