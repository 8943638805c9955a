#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairmw/domain.hpp"
#include "fairmw/engines.hpp"
#include "fairmw/experts.hpp"
#include "fairmw/ingest.hpp"
#include "fairmw/metrics.hpp"

namespace fairmw {

// Config files -----------------------------------------------------------------

/// Ordered `key = value` entries. '#' starts a comment, blank lines are
/// ignored, a repeated key keeps its last value but its first position.
class KeyValues {
public:
    static KeyValues parse(std::string_view text, std::string_view origin = "config");

    void set(const std::string& key, std::string value);
    std::optional<std::string> get(const std::string& key) const;
    bool contains(const std::string& key) const { return get(key).has_value(); }
    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

enum class DataSource { synthetic, dataset };
enum class ExpertSource { synthetic, file, builtin };

struct DataSpec {
    DataSource source = DataSource::synthetic;
    // synthetic arrivals: group A with probability p, then positive label with
    // probability mu_a or mu_b
    double p = 0.5;
    double mu_a = 0.5;
    double mu_b = 0.5;
    // dataset arrivals
    std::string preset;
    std::filesystem::path path;
    DatasetSchema schema;
    double split_ratio = 0.7;
    std::uint64_t split_seed = 0;
};

struct ExpertSpec {
    ExpertSource source = ExpertSource::synthetic;
    std::vector<std::string> names;
    std::vector<ErrorProfile> profiles;
    std::filesystem::path file;
    std::vector<BuiltinKind> builtins;
    bool include_group = true;
    std::size_t epochs = 500;
    double learning_rate = 0.1;
};

struct ExperimentConfig {
    RunConfig run;
    DataSpec data;
    ExpertSpec experts;
    /// Fairness level for the bound report; taken from the synthetic profiles
    /// or measured when absent.
    std::optional<double> epsilon;
    /// The entries as written (preset keys not expanded), echoed in summaries.
    KeyValues source;
    std::filesystem::path base_dir;
};

/// Throws ConfigError for unknown keys, malformed values or violated
/// invariants. Relative paths resolve against `base_dir`; presets resolve
/// against `base_dir`, then $FAIRMW_DATA_DIR, then the bundled data directory.
ExperimentConfig parse_experiment(const KeyValues& kv, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);
/// Only the data.* part (presets expanded), for dataset statistics.
DataSpec parse_data_spec(const KeyValues& kv, const std::filesystem::path& base_dir);

/// Applies one `key = value` override (used by sweeps and CLI flags) and
/// re-validates.
ExperimentConfig with_override(const ExperimentConfig& config, const std::string& key, const std::string& value);

/// Config assignments for one sweep value. `parameter` is eta, lambda,
/// b_tolerance or q_recompute_stride; lambda and b_tolerance take three
/// comma-separated numbers.
std::vector<std::pair<std::string, std::string>> sweep_assignments(std::string_view parameter,
                                                                   std::string_view value);

/// The preset file for `name`, or ConfigError listing the searched places.
std::filesystem::path find_preset(const std::string& name, const std::filesystem::path& base_dir);
std::filesystem::path bundled_data_dir();

// Running ----------------------------------------------------------------------

/// Bernoulli arrivals without features.
std::vector<Example> synthetic_stream(std::size_t n, double p, double mu_a, double mu_b, Rng& rng);

/// Loaded once per experiment: the dataset split and the expert ensemble.
struct PreparedExperiment {
    ExperimentConfig config;
    /// Test split for dataset runs (reshuffled per trial); empty for synthetic.
    std::vector<Example> test;
    std::optional<IngestReport> ingest;
    ExpertEnsemble ensemble;
};

/// Throws Error (data or config kinds) on failure.
PreparedExperiment prepare(const ExperimentConfig& config);

/// Arrival stream of one trial.
std::vector<Example> trial_stream(const PreparedExperiment& prepared, std::uint64_t trial);

struct TrialRecord {
    std::uint64_t trial = 0;
    std::size_t rounds = 0;
    double eta = 0.0;
    RegretValue regret;
    FairnessReport fairness;
    double error_rate = 0.0;
    BoundReport bounds;
    std::optional<QDistribution> final_q;
};

/// One trial: the trajectory plus its per-round series.
struct TrialResult {
    TrialRecord record;
    std::optional<Trajectory> trajectory;
    // cumulative regret / t and running gaps after each round
    std::vector<double> regret_realized_per_t;
    std::vector<double> regret_expected_per_t;
    std::vector<std::optional<double>> fpr_gap, fnr_gap, eer_gap;
    std::vector<std::optional<double>> q_a_neg, q_b_neg;
};

TrialResult run_one(const PreparedExperiment& prepared, std::uint64_t trial);

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<TrialRecord> trials;
    /// Series over rounds, averaged over the trials where the value is defined.
    std::vector<double> mean_regret_realized_per_t;
    std::vector<double> mean_regret_expected_per_t;
    std::vector<std::optional<double>> mean_fpr_gap, mean_fnr_gap, mean_eer_gap;
    std::vector<std::optional<double>> mean_q_a_neg, mean_q_b_neg;
    std::vector<Trajectory> trajectories;
};

struct RunOptions {
    /// 0 means hardware concurrency.
    std::size_t workers = 0;
    bool keep_trajectories = false;
};

/// Runs config.run.trials trials on `workers` threads; results are combined
/// in trial order so the output does not depend on the worker count.
ExperimentResult run_experiment(const PreparedExperiment& prepared, const RunOptions& options = {});

std::string summary_json(const ExperimentResult& result);
std::string rounds_csv(const ExperimentResult& result);
std::string bounds_json(const ExperimentResult& result);
std::string bound_report_json(const BoundReport& report);

struct Aggregate {
    double mean = 0.0;
    double std = 0.0;
    /// Trials where the value is defined.
    std::size_t count = 0;
};

/// Sample mean and standard deviation over the defined values.
Aggregate aggregate(const std::vector<std::optional<double>>& values);

}  // namespace fairmw
