#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fairmw/error.hpp"
#include "fairmw/experiment.hpp"

using namespace fairmw;

namespace {

const std::filesystem::path kSource(FAIRMW_SOURCE_DIR);

ExperimentConfig parse(const std::string& text, const std::filesystem::path& base = kSource / "configs") {
    return parse_experiment(KeyValues::parse(text), base);
}

bool config_error(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.kind() == ErrorKind::ConfigError;
    }
    return false;
}

}  // namespace

TEST_CASE("KeyValues") {
    const auto kv = KeyValues::parse("a = 1\n# comment\n\n b=two words  # trailing\na = 3\n");
    REQUIRE(kv.entries().size() == 2);
    CHECK(kv.entries()[0] == std::pair<std::string, std::string>{"a", "3"});
    CHECK(*kv.get("b") == "two words");
    CHECK_FALSE(kv.contains("c"));
    CHECK_THROWS_AS(KeyValues::parse("no equals sign"), Error);
    CHECK_THROWS_AS(KeyValues::parse(" = 4"), Error);
}

TEST_CASE("a synthetic config") {
    const auto cfg = load_experiment(kSource / "configs" / "biased_synthetic.cfg");
    CHECK(cfg.run.engine == EngineKind::fairness_aware);
    CHECK(cfg.run.horizon == 5000);
    CHECK(*cfg.run.eta == 0.1);
    CHECK(cfg.run.trials == 100);
    CHECK(cfg.run.lambda == std::array<double, 3>{1, 1, 0});
    CHECK(cfg.data.source == DataSource::synthetic);
    CHECK(cfg.data.p == 0.85);
    CHECK(cfg.experts.names == std::vector<std::string>{"f1", "f2"});
    CHECK(cfg.experts.profiles[1].error == CellValues{0.15, 0.05, 0.13, 0.08});
    // Epsilon defaults to the largest group gap across the profiles.
    CHECK(*cfg.epsilon == doctest::Approx(0.03));
}

TEST_CASE("uniform rates and eta auto") {
    const auto cfg = parse("horizon = 10\neta = auto\nexperts.rates = 0.1, 0.2 0.3\n");
    CHECK_FALSE(cfg.run.eta.has_value());
    CHECK(cfg.experts.names == std::vector<std::string>{"f1", "f2", "f3"});
    CHECK(*cfg.epsilon == 0.0);
}

TEST_CASE("config errors") {
    CHECK(config_error("horizon = 10\nexperts.rates = 0.1, 0.2\ncolour = blue\n"));
    CHECK(config_error("horizon = ten\nexperts.rates = 0.1, 0.2\n"));
    CHECK(config_error("horizon = 10\nexperts.rates = 0.1\n"));
    CHECK(config_error("horizon = 10\nexperts.rates = 0.1, 1.5\n"));
    CHECK(config_error("horizon = 10\nexperts.profile.f = 0.1, 0.2, 0.3\nexperts.profile.g = 0,0,0,0\n"));
    CHECK(config_error("horizon = 0\nexperts.rates = 0.1, 0.2\n"));
    CHECK(config_error("horizon = 10\nexperts.source = builtin\n"));
    CHECK(config_error("horizon = 10\nexperts.rates = 0.1, 0.2\ndata.p = 2\n"));
    CHECK(config_error("horizon = 10\nexperts.rates = 0.1, 0.2\ndata.preset = nowhere\n"));
    CHECK(config_error("horizon = 10\nexperts.rates = 0.1, 0.2\nengine = magic\n"));
    CHECK_FALSE(config_error("horizon = 10\nexperts.rates = 0.1, 0.2\n"));
    try {
        load_experiment("/nonexistent/x.cfg");
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
    }
}

TEST_CASE("presets resolve relative to their own file and can be overridden") {
    const auto cfg = parse("experts.source = builtin\ndata.preset = german\ndata.split_ratio = 0.5\n");
    CHECK(cfg.data.source == DataSource::dataset);
    CHECK(cfg.data.path == (kSource / "data" / "german.csv").lexically_normal());
    CHECK(cfg.data.schema.group_a_min == 25.0);
    CHECK(cfg.data.split_ratio == 0.5);
    CHECK(cfg.experts.builtins == std::vector<BuiltinKind>{BuiltinKind::logistic, BuiltinKind::stump});
    const auto spec = parse_data_spec(KeyValues::parse("data.preset = adult"), kSource);
    CHECK(spec.schema.label_column == "income");
}

TEST_CASE("with_override re-validates") {
    const auto cfg = load_experiment(kSource / "configs" / "minimal.cfg");
    const auto changed = with_override(cfg, "eta", "0.2");
    CHECK(*changed.run.eta == 0.2);
    CHECK(changed.run.horizon == cfg.run.horizon);
    CHECK_THROWS_AS(with_override(cfg, "eta", "-1"), Error);
    CHECK_THROWS_AS(with_override(cfg, "nonsense", "1"), Error);
}

TEST_CASE("sweep_assignments") {
    CHECK(sweep_assignments("eta", "0.05") == std::vector<std::pair<std::string, std::string>>{{"eta", "0.05"}});
    CHECK(sweep_assignments("q_recompute_stride", "10")[0].first == "stride");
    const auto l = sweep_assignments("lambda", "1,2,0");
    REQUIRE(l.size() == 3);
    CHECK(l[2] == std::pair<std::string, std::string>{"lambda.regret", "0"});
    CHECK(sweep_assignments("b_tolerance", "0 0 0.1")[0].first == "b.fpr");
    CHECK_THROWS_AS(sweep_assignments("lambda", "1,2"), Error);
    CHECK_THROWS_AS(sweep_assignments("horizon", "5"), Error);
}

TEST_CASE("synthetic streams follow p and mu") {
    Rng rng(5);
    const auto s = synthetic_stream(20000, 0.8, 0.3, 0.1, rng);
    const auto stats = dataset_stats(s);
    CHECK(std::abs(stats.p - 0.8) < 0.02);
    CHECK(std::abs(*stats.mu_a_pos - 0.3) < 0.02);
    CHECK(std::abs(*stats.mu_b_pos - 0.1) < 0.02);
}

TEST_CASE("aggregate") {
    const auto a = aggregate({1.0, std::nullopt, 3.0});
    CHECK(a.count == 2);
    CHECK(a.mean == 2.0);
    CHECK(a.std == doctest::Approx(std::sqrt(2.0)));
    CHECK(aggregate({}).count == 0);
}

TEST_CASE("experiments are reproducible and independent of the worker count") {
    auto cfg = load_experiment(kSource / "configs" / "minimal.cfg");
    cfg = with_override(cfg, "trials", "5");
    const auto prepared = prepare(cfg);
    const auto serial = run_experiment(prepared, RunOptions{1, false});
    const auto parallel = run_experiment(prepared, RunOptions{3, false});
    CHECK(summary_json(serial) == summary_json(parallel));
    CHECK(rounds_csv(serial) == rounds_csv(parallel));
    CHECK(bounds_json(serial) == bounds_json(parallel));
    CHECK(serial.trials.size() == 5);
    CHECK(serial.mean_regret_realized_per_t.size() == 100);
    // Different trials see different streams.
    CHECK(trial_stream(prepared, 0) != trial_stream(prepared, 1));
}
