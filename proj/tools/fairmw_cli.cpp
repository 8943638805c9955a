#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fairmw/csv.hpp"
#include "fairmw/error.hpp"
#include "fairmw/experiment.hpp"
#include "fairmw/ingest.hpp"
#include "fairmw/metrics.hpp"

namespace fs = std::filesystem;
using namespace fairmw;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;
constexpr int kExitViolation = 5;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError:
            return kExitConfig;
        case ErrorKind::IoError:
        case ErrorKind::FormatError:
        case ErrorKind::SchemaError:
        case ErrorKind::EmptyDataset:
        case ErrorKind::DegenerateData:
            return kExitData;
        default:
            return kExitRuntime;
    }
}

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("fairmw");
    logger->set_pattern("%l: %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("FAIRMW_LOG")) {
        const std::string level(env);
        if (level == "error" || level == "warn" || level == "info" || level == "debug") {
            spdlog::set_level(spdlog::level::from_str(level));
        } else {
            spdlog::warn("ignoring FAIRMW_LOG={} (use error, warn, info or debug)", level);
        }
    }
}

struct CommonOptions {
    std::string config;
    std::string out;
    std::size_t workers = 0;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
};

ExperimentConfig load_with_overrides(const CommonOptions& opts) {
    ExperimentConfig cfg = load_experiment(opts.config);
    if (opts.seed) cfg = with_override(cfg, "seed", std::to_string(*opts.seed));
    if (opts.trials) cfg = with_override(cfg, "trials", std::to_string(*opts.trials));
    return cfg;
}

void write_outputs(const fs::path& dir, const ExperimentResult& result) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
    write_file(dir / "summary.json", summary_json(result));
    write_file(dir / "rounds.csv", rounds_csv(result));
    write_file(dir / "bounds.json", bounds_json(result));
    if (!result.trajectories.empty()) {
        fs::create_directories(dir / "trajectories", ec);
        for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
            write_file(dir / "trajectories" / ("trial_" + std::to_string(k) + ".json"),
                       serialize(result.trajectories[k]));
        }
    }
}

void log_summary(const ExperimentResult& result) {
    std::vector<std::optional<double>> regret, fpr, fnr;
    for (const auto& t : result.trials) {
        regret.push_back(t.regret.realized);
        fpr.push_back(t.fairness.fpr_gap);
        fnr.push_back(t.fairness.fnr_gap);
    }
    spdlog::info("{} trials of {} rounds: mean regret {:.4g}, mean fpr_gap {:.4g}, mean fnr_gap {:.4g}",
                 result.trials.size(), result.mean_regret_realized_per_t.size(), aggregate(regret).mean,
                 aggregate(fpr).mean, aggregate(fnr).mean);
}

int cmd_run(const CommonOptions& opts, bool keep_trajectories) {
    const ExperimentConfig cfg = load_with_overrides(opts);
    const PreparedExperiment prepared = prepare(cfg);
    spdlog::info("running {} trial(s) of {}", cfg.run.trials, to_string(cfg.run.engine));
    const ExperimentResult result = run_experiment(prepared, {opts.workers, keep_trajectories});
    write_outputs(opts.out, result);
    log_summary(result);
    return 0;
}

int cmd_stats(const std::string& preset, const std::string& dataset, const std::string& config, bool full) {
    KeyValues kv;
    fs::path base;
    if (!config.empty()) {
        kv = KeyValues::parse(read_file(config), config);
        base = fs::path(config).parent_path();
    }
    if (!preset.empty()) kv.set("data.preset", preset);
    if (!dataset.empty()) kv.set("data.path", fs::absolute(dataset).string());
    if (!kv.contains("data.preset") && !kv.contains("data.path")) {
        throw Error(ErrorKind::ConfigError, "stats needs --preset, --dataset or --config");
    }
    kv.set("data.source", "dataset");
    const DataSpec spec = parse_data_spec(kv, base);
    const Dataset data = load_dataset(spec.path, spec.schema);
    if (data.examples.empty()) throw Error(ErrorKind::EmptyDataset, "no usable rows in " + spec.path.string());
    const auto [train, test] =
        split_shuffle(data.examples, spec.split_ratio, derive_seed(spec.split_seed, RngStream::split, 0));
    const DatasetStats stats = dataset_stats(full ? std::span<const Example>(data.examples) : test);

    const auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nullptr; };
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    for (const auto& column : data.report.columns) {
        features.push_back({{"name", column.name},
                            {"type", column.numeric ? "numeric" : "categorical"},
                            {"categories", column.categories}});
    }
    const nlohmann::ordered_json doc = {
        {"dataset", spec.path.string()},
        {"preset", spec.preset},
        {"scope", full ? "full" : "test"},
        {"rows_read", data.report.rows_read},
        {"rows_kept", data.report.rows_kept},
        {"rows_dropped", data.report.rows_dropped},
        {"train_size", train.size()},
        {"test_size", test.size()},
        {"n_rounds", stats.n_rounds},
        {"p", stats.p},
        {"mu_a_pos", opt(stats.mu_a_pos)},
        {"mu_b_pos", opt(stats.mu_b_pos)},
        {"disparate_impact", opt(stats.disparate_impact)},
        {"feature_count", data.report.feature_names.size()},
        {"features", features},
    };
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int report_violation(const std::string& prefix, const Margin& m) {
    spdlog::error("bound violation: {}{} margin={}", prefix, m.where(), format_double(m.value));
    return kExitViolation;
}

int cmd_validate(const CommonOptions& opts, const std::string& trajectory_path, std::optional<double> epsilon) {
    if (!trajectory_path.empty()) {
        const Trajectory trajectory = deserialize_trajectory(read_file(trajectory_path));
        const BoundReport report = validate_bounds(trajectory, BoundOptions{epsilon});
        const std::string json = bound_report_json(report) + "\n";
        if (opts.out.empty()) {
            std::cout << json;
        } else {
            fs::create_directories(opts.out);
            write_file(fs::path(opts.out) / "bounds.json", json);
        }
        if (const auto m = report.first_violation(kBoundTolerance)) return report_violation("", *m);
        spdlog::info("all {} margins hold", report.margins.size());
        return 0;
    }
    if (opts.config.empty()) throw Error(ErrorKind::ConfigError, "validate-bounds needs --config or --trajectory");
    ExperimentConfig cfg = load_with_overrides(opts);
    if (epsilon) cfg = with_override(cfg, "epsilon", format_double(*epsilon));
    const ExperimentResult result = run_experiment(prepare(cfg), {opts.workers, false});
    if (!opts.out.empty()) {
        fs::create_directories(opts.out);
        write_file(fs::path(opts.out) / "bounds.json", bounds_json(result));
    }
    std::size_t checked = 0;
    for (const auto& t : result.trials) {
        checked += t.bounds.margins.size();
        if (const auto m = t.bounds.first_violation(kBoundTolerance)) {
            return report_violation("trial=" + std::to_string(t.trial) + " ", *m);
        }
    }
    spdlog::info("all {} margins hold over {} trials", checked, result.trials.size());
    return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::string& parameter, const std::vector<std::string>& values) {
    if (values.empty()) throw Error(ErrorKind::ConfigError, "sweep needs at least one value");
    const ExperimentConfig base = load_with_overrides(opts);
    // Validate every value before running anything.
    std::vector<ExperimentConfig> configs;
    for (const auto& value : values) {
        ExperimentConfig cfg = base;
        for (const auto& [key, v] : sweep_assignments(parameter, value)) cfg = with_override(cfg, key, v);
        configs.push_back(std::move(cfg));
    }
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < configs.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "%03zu", i);
        spdlog::info("sweep {}={} -> {}", parameter, values[i], name);
        const ExperimentResult result = run_experiment(prepare(configs[i]), {opts.workers, false});
        write_outputs(fs::path(opts.out) / name, result);
        log_summary(result);
        index.push_back({{"index", i}, {"directory", name}, {"parameter", parameter}, {"value", values[i]}});
    }
    write_file(fs::path(opts.out) / "sweep.json", index.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Fairness-aware multiplicative weights experiments"};
    app.require_subcommand(1);

    CommonOptions common;
    const auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("--config", common.config, "experiment config file");
        if (config_required) c->required();
        sub->add_option("--out", common.out, "output directory");
        sub->add_option("--workers", common.workers, "worker threads (default: all cores)");
        sub->add_option("--seed", common.seed, "override the config seed");
        sub->add_option("--trials", common.trials, "override the config trial count");
    };

    auto* run = app.add_subcommand("run", "run trials and write summary.json, rounds.csv, bounds.json");
    add_common(run, true);
    run->get_option("--out")->required();
    bool keep_trajectories = false;
    run->add_flag("--trajectories", keep_trajectories, "also write one trajectory JSON per trial");

    auto* stats = app.add_subcommand("stats", "print dataset statistics as JSON");
    std::string preset, dataset, stats_config;
    bool full = false;
    stats->add_option("--preset", preset, "schema preset name");
    stats->add_option("--dataset", dataset, "dataset CSV (overrides the preset's path)");
    stats->add_option("--config", stats_config, "config whose data.* keys describe the dataset");
    stats->add_flag("--full", full, "statistics of the whole dataset instead of the test split");

    auto* validate = app.add_subcommand("validate-bounds", "check every deterministic bound; exit 5 on violation");
    add_common(validate, false);
    std::string trajectory_path;
    std::optional<double> epsilon;
    validate->add_option("--trajectory", trajectory_path, "check a saved trajectory instead of running");
    validate->add_option("--epsilon", epsilon, "per-expert fairness level for the reported bound");

    auto* sweep = app.add_subcommand("sweep", "run one experiment per parameter value");
    add_common(sweep, true);
    sweep->get_option("--out")->required();
    std::string parameter;
    std::vector<std::string> values;
    sweep->add_option("--parameter", parameter, "eta, lambda, b_tolerance or q_recompute_stride")->required();
    sweep->add_option("--values", values, "values; lambda and b_tolerance take a,b,c triples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run) return cmd_run(common, keep_trajectories);
        if (*stats) return cmd_stats(preset, dataset, stats_config, full);
        if (*validate) return cmd_validate(common, trajectory_path, epsilon);
        if (*sweep) return cmd_sweep(common, parameter, values);
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitRuntime;
    }
    return kExitRuntime;
}
