#pragma once

#include "tsboot/bootstrap.hpp"
#include "tsboot/processes.hpp"
#include "tsboot/rng.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tsboot::harness {

enum class ExperimentKind {
    ar1_bootstrap_comparison,
    hetero_bootstrap_comparison,
    arch_estimator_comparison,
    arch_bootstrap_consistency,
    limit_law_check,
};

std::string experiment_name(ExperimentKind kind);

/// Flat experiment description, loaded from a single JSON document. Unknown
/// keys are hard errors so typos cannot silently change a study.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::limit_law_check;

    // Model block ("model" object in the JSON).
    std::string model_type;  // "ar1" | "hetero_ar1" | "arch"
    double theta = 0.0;
    double sigma = 1.0;
    rng::ErrorDist error = rng::ErrorDist::standard_normal();
    std::optional<double> sigma1_sq;  // hetero two-period schedule
    std::optional<double> sigma2_sq;
    std::optional<double> tau_constant;
    std::optional<double> tau_power_c;
    std::optional<double> tau_power_alpha;
    double c0 = 1.0;                            // arch
    std::vector<double> b;                      // arch
    std::vector<rng::ErrorDist> error_dists;    // arch estimator comparison
    std::size_t burn_in = processes::kDefaultArchBurnIn;

    std::size_t n = 0;
    std::size_t B = 0;
    std::size_t mc_replicates = 0;
    std::optional<std::size_t> m;  // m-out-of-n size
    std::string weight_scheme = "multinomial";  // or "normal"
    double weight_sigma_sq = 1.0;
    std::vector<std::string> estimators;
    std::uint64_t master_seed = 0;
    std::string output_dir;
    bool fresh_series_per_replicate = false;

    std::string raw_json;  // echoed into the manifest

    processes::TauSchedule tau_schedule() const;
    weights::WeightScheme make_weight_scheme(std::size_t row_length) const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

using Cell = std::variant<std::string, double>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

struct ExperimentReport {
    std::string experiment;
    std::uint64_t master_seed = 0;
    std::string version;
    std::filesystem::path output_dir;
    std::vector<Table> tables;
    std::vector<std::string> emitted_files;            // relative to output_dir
    std::map<std::string, std::size_t> exclusions;      // replicate accounting
    bool degenerate_counts_warning = false;             // 1-draw samples etc.
    double wall_seconds = 0.0;  // console diagnostics only, never written
    std::string config_echo;
};

/// Runs the configured protocol. Pivot samples and density curves are
/// persisted as CSV under output_dir as they are produced; tables and the
/// manifest follow via emit_report. All randomness derives from master_seed,
/// each replicate from its own child stream, so any worker count yields
/// byte-identical outputs.
ExperimentReport run_experiment(const ExperimentConfig& config, unsigned threads = 1);

enum class ReportFormat { csv, markdown };

/// Writes tables (CSV per table, or one markdown report) plus manifest.json.
/// Table cells carry 6 significant digits; emission order is fixed.
void emit_report(ExperimentReport& report, ReportFormat format);

/// Mean of |c0_hat/b1_hat - c0/b1| over replicates; fits whose b1_hat falls
/// below 1e-6 are excluded (and counted by the caller via `excluded`).
double average_absolute_error(const std::vector<std::array<double, 2>>& estimates,
                              double c0_true, double b1_true, std::size_t* excluded);

/// --threads resolution: TSBOOT_THREADS overrides the CLI value; 0 means
/// machine parallelism. Never affects numerical output.
unsigned resolve_threads(unsigned cli_threads);

}  // namespace tsboot::harness
