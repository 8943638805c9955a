#include <algorithm>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "fairmw/csv.hpp"
#include "fairmw/error.hpp"
#include "fairmw/experiment.hpp"

namespace fairmw {

using nlohmann::ordered_json;

std::vector<Example> synthetic_stream(std::size_t n, double p, double mu_a, double mu_b, Rng& rng) {
    std::vector<Example> stream(n);
    for (auto& ex : stream) {
        ex.group = rng.uniform() < p ? GroupId::A : GroupId::B;
        ex.label = label_from_bool(rng.uniform() < (ex.group == GroupId::A ? mu_a : mu_b));
    }
    return stream;
}

namespace {

ExpertEnsemble build_ensemble(const ExperimentConfig& cfg, std::span<const Example> train) {
    const ExpertSpec& spec = cfg.experts;
    switch (spec.source) {
        case ExpertSource::synthetic:
            return ExpertEnsemble::synthetic(spec.names, spec.profiles);
        case ExpertSource::file:
            return load_prediction_file(spec.file);
        case ExpertSource::builtin: {
            std::vector<std::string> names;
            std::vector<TrainedExpert> models;
            for (std::size_t k = 0; k < spec.builtins.size(); ++k) {
                BuiltinOptions options;
                options.kind = spec.builtins[k];
                options.epochs = spec.epochs;
                options.learning_rate = spec.learning_rate;
                options.include_group = spec.include_group;
                options.seed = derive_seed(cfg.data.split_seed, RngStream::split, k + 1);
                models.push_back(train_builtin(train, options));
                std::string name(to_string(spec.builtins[k]));
                const auto earlier = std::count(spec.builtins.begin(), spec.builtins.begin() + static_cast<long>(k),
                                                spec.builtins[k]);
                if (earlier > 0) name += "_" + std::to_string(earlier + 1);
                names.push_back(std::move(name));
            }
            return ExpertEnsemble::builtin(std::move(names), std::move(models));
        }
    }
    throw Error(ErrorKind::ConfigError, "unknown expert source");
}

std::optional<double> mean_of(double sum, std::size_t count) {
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

ordered_json number_or_null(const std::optional<double>& v) {
    return v && std::isfinite(*v) ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json aggregate_json(const Aggregate& a) {
    if (a.count == 0) return {{"mean", nullptr}, {"std", nullptr}, {"count", 0}};
    return {{"mean", a.mean}, {"std", a.std}, {"count", a.count}};
}

ordered_json q_json(const std::optional<QDistribution>& q) {
    if (!q) return nullptr;
    return {{"a_neg", q->a_neg}, {"b_neg", q->b_neg}, {"a_pos", q->a_pos}, {"b_pos", q->b_pos}};
}

// Running sums for one per-round series, folded in trial order.
struct SeriesSum {
    std::vector<double> sum;
    std::vector<std::size_t> count;

    void add(std::size_t i, const std::optional<double>& v) {
        if (i >= sum.size()) {
            sum.resize(i + 1, 0.0);
            count.resize(i + 1, 0);
        }
        if (v) {
            sum[i] += *v;
            ++count[i];
        }
    }
    std::vector<std::optional<double>> means() const {
        std::vector<std::optional<double>> out(sum.size());
        for (std::size_t i = 0; i < sum.size(); ++i) out[i] = mean_of(sum[i], count[i]);
        return out;
    }
};

}  // namespace

PreparedExperiment prepare(const ExperimentConfig& config) {
    if (config.data.source == DataSource::synthetic) {
        return PreparedExperiment{config, {}, std::nullopt, build_ensemble(config, {})};
    }
    Dataset dataset = load_dataset(config.data.path, config.data.schema);
    if (dataset.examples.empty()) throw Error(ErrorKind::EmptyDataset, "no usable rows in " + config.data.path.string());
    auto [train, test] = split_shuffle(dataset.examples, config.data.split_ratio,
                                       derive_seed(config.data.split_seed, RngStream::split, 0));
    ExpertEnsemble ensemble = build_ensemble(config, train);
    return PreparedExperiment{config, std::move(test), std::move(dataset.report), std::move(ensemble)};
}

std::vector<Example> trial_stream(const PreparedExperiment& prepared, std::uint64_t trial) {
    const ExperimentConfig& cfg = prepared.config;
    if (cfg.data.source == DataSource::synthetic) {
        Rng rng(derive_seed(cfg.run.seed, RngStream::arrivals, trial));
        return synthetic_stream(cfg.run.horizon, cfg.data.p, cfg.data.mu_a, cfg.data.mu_b, rng);
    }
    return shuffle_arrivals(prepared.test, derive_seed(cfg.run.seed, RngStream::shuffle, trial));
}

TrialResult run_one(const PreparedExperiment& prepared, std::uint64_t trial) {
    const ExperimentConfig& cfg = prepared.config;
    const auto stream = trial_stream(prepared, trial);
    Trajectory trajectory = run_trial(cfg.run, stream, prepared.ensemble, trial);

    TrialResult result;
    TrialRecord& rec = result.record;
    rec.trial = trial;
    rec.rounds = trajectory.rounds();
    rec.eta = trajectory.eta();
    if (rec.rounds > 0) {
        rec.regret = regret(trajectory);
        rec.error_rate = 0.0;
        for (GroupId g : kGroups) {
            const Confusion& c = trajectory.confusion(g);
            rec.error_rate += static_cast<double>(c.fp + c.fn);
        }
        rec.error_rate /= static_cast<double>(rec.rounds);
    }
    rec.fairness = compute_rates(trajectory);
    rec.bounds = validate_bounds(trajectory, BoundOptions{cfg.epsilon});
    rec.final_q = trajectory.last_q();

    const std::size_t n = trajectory.rounds();
    const std::size_t d = trajectory.experts();
    result.regret_realized_per_t.reserve(n);
    result.regret_expected_per_t.reserve(n);
    std::vector<double> expert_total(d, 0.0);
    double realized = 0.0;
    double expected = 0.0;
    std::array<Confusion, 2> confusion{};
    for (const auto& o : trajectory.outcomes()) {
        realized += o.realized_loss;
        expected += o.expected_loss;
        for (std::size_t f = 0; f < d; ++f) expert_total[f] += o.per_expert_losses[f];
        const double best = *std::min_element(expert_total.begin(), expert_total.end());
        const auto t = static_cast<double>(o.t);
        result.regret_realized_per_t.push_back((realized - best) / t);
        result.regret_expected_per_t.push_back((expected - best) / t);
        confusion[static_cast<std::size_t>(o.group)].add(o.label, o.prediction);
        const FairnessReport running = compute_rates(confusion);
        result.fpr_gap.push_back(running.fpr_gap);
        result.fnr_gap.push_back(running.fnr_gap);
        result.eer_gap.push_back(running.eer_gap);
        result.q_a_neg.push_back(o.q_used ? std::optional(o.q_used->a_neg) : std::nullopt);
        result.q_b_neg.push_back(o.q_used ? std::optional(o.q_used->b_neg) : std::nullopt);
    }
    result.trajectory = std::move(trajectory);
    return result;
}

ExperimentResult run_experiment(const PreparedExperiment& prepared, const RunOptions& options) {
    const std::size_t trials = prepared.config.run.trials;
    std::size_t workers = options.workers == 0 ? std::thread::hardware_concurrency() : options.workers;
    workers = std::clamp<std::size_t>(workers, 1, trials);

    ExperimentResult out;
    out.config = prepared.config;
    SeriesSum realized, expected, fpr, fnr, eer, qa, qb;

    // Trials run in batches of `workers`; each batch is folded in trial order
    // so sums are accumulated identically for every worker count.
    for (std::size_t start = 0; start < trials; start += workers) {
        const std::size_t batch = std::min(workers, trials - start);
        std::vector<std::optional<TrialResult>> results(batch);
        std::vector<std::exception_ptr> errors(batch);
        const auto work = [&](std::size_t k) {
            try {
                results[k] = run_one(prepared, start + k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        };
        if (batch == 1) {
            work(0);
        } else {
            std::vector<std::jthread> threads;
            threads.reserve(batch);
            for (std::size_t k = 0; k < batch; ++k) threads.emplace_back(work, k);
        }
        for (std::size_t k = 0; k < batch; ++k) {
            if (errors[k]) std::rethrow_exception(errors[k]);
            TrialResult& r = *results[k];
            for (std::size_t i = 0; i < r.regret_realized_per_t.size(); ++i) {
                realized.add(i, r.regret_realized_per_t[i]);
                expected.add(i, r.regret_expected_per_t[i]);
                fpr.add(i, r.fpr_gap[i]);
                fnr.add(i, r.fnr_gap[i]);
                eer.add(i, r.eer_gap[i]);
                qa.add(i, r.q_a_neg[i]);
                qb.add(i, r.q_b_neg[i]);
            }
            out.trials.push_back(std::move(r.record));
            if (options.keep_trajectories) out.trajectories.push_back(std::move(*r.trajectory));
        }
    }

    for (const auto& v : realized.means()) out.mean_regret_realized_per_t.push_back(v.value_or(0.0));
    for (const auto& v : expected.means()) out.mean_regret_expected_per_t.push_back(v.value_or(0.0));
    out.mean_fpr_gap = fpr.means();
    out.mean_fnr_gap = fnr.means();
    out.mean_eer_gap = eer.means();
    out.mean_q_a_neg = qa.means();
    out.mean_q_b_neg = qb.means();
    return out;
}

Aggregate aggregate(const std::vector<std::optional<double>>& values) {
    Aggregate a;
    double sum = 0.0;
    for (const auto& v : values) {
        if (!v) continue;
        sum += *v;
        ++a.count;
    }
    if (a.count == 0) return a;
    a.mean = sum / static_cast<double>(a.count);
    if (a.count > 1) {
        double sq = 0.0;
        for (const auto& v : values) {
            if (v) sq += (*v - a.mean) * (*v - a.mean);
        }
        a.std = std::sqrt(sq / static_cast<double>(a.count - 1));
    }
    return a;
}

// ---------------------------------------------------------------------------

std::string bound_report_json(const BoundReport& report) {
    ordered_json margins = ordered_json::array();
    for (const auto& m : report.margins) {
        ordered_json cell = nullptr;
        if (m.group) {
            std::string c(1, group_name(*m.group));
            if (m.label) c += label_sign(*m.label);
            cell = c;
        }
        margins.push_back({
            {"bound", std::string(to_string(m.bound))},
            {"cell", cell},
            {"expert", m.expert ? ordered_json(*m.expert) : ordered_json(nullptr)},
            {"margin", m.value},
        });
    }
    ordered_json min_margins = ordered_json::object();
    for (BoundKind k : {BoundKind::theorem1, BoundKind::lemma1, BoundKind::lemma2}) {
        if (const auto v = report.min_margin(k)) min_margins[std::string(to_string(k))] = *v;
    }
    const ordered_json j = {
        {"engine", std::string(to_string(report.engine))},
        {"eta", report.eta},
        {"gamma_eta", report.gamma_eta},
        {"log_term", report.log_term},
        {"epsilon", number_or_null(report.epsilon)},
        {"fpr_bound_rhs", number_or_null(report.fpr_bound_rhs)},
        {"fnr_bound_rhs", number_or_null(report.fnr_bound_rhs)},
        {"min_margin", min_margins},
        {"margins", margins},
    };
    return j.dump();
}

namespace {

ordered_json config_echo(const ExperimentConfig& cfg) {
    ordered_json echo = ordered_json::object();
    for (const auto& [k, v] : cfg.source.entries()) echo[k] = v;
    return echo;
}

ordered_json resolved_run(const ExperimentConfig& cfg) {
    const RunConfig& r = cfg.run;
    return {
        {"engine", std::string(to_string(r.engine))},
        {"horizon", r.horizon},
        {"eta", r.eta ? ordered_json(*r.eta) : ordered_json("auto")},
        {"seed", r.seed},
        {"trials", r.trials},
        {"lambda", r.lambda},
        {"b_tolerance", r.b_tolerance},
        {"dirichlet_alpha", r.dirichlet_alpha},
        {"q_recompute_stride", r.q_recompute_stride},
        {"fairness_budget", r.fairness_budget},
        {"epsilon", number_or_null(cfg.epsilon)},
    };
}

}  // namespace

std::string summary_json(const ExperimentResult& result) {
    ordered_json trials = ordered_json::array();
    std::vector<std::optional<double>> reg_r, reg_e, err, fpr, fnr, eer;
    for (const auto& t : result.trials) {
        const FairnessReport& f = t.fairness;
        ordered_json min_margins = ordered_json::object();
        for (BoundKind k : {BoundKind::theorem1, BoundKind::lemma1, BoundKind::lemma2}) {
            if (const auto v = t.bounds.min_margin(k)) min_margins[std::string(to_string(k))] = *v;
        }
        trials.push_back({
            {"trial", t.trial},
            {"rounds", t.rounds},
            {"eta", t.eta},
            {"regret_realized", t.regret.realized},
            {"regret_expected", t.regret.expected},
            {"error_rate", t.error_rate},
            {"fpr_a", number_or_null(f.fpr_a)},
            {"fpr_b", number_or_null(f.fpr_b)},
            {"fnr_a", number_or_null(f.fnr_a)},
            {"fnr_b", number_or_null(f.fnr_b)},
            {"fpr_gap", number_or_null(f.fpr_gap)},
            {"fnr_gap", number_or_null(f.fnr_gap)},
            {"eer_gap", number_or_null(f.eer_gap)},
            {"min_margin", min_margins},
            {"fpr_bound_rhs", number_or_null(t.bounds.fpr_bound_rhs)},
            {"fnr_bound_rhs", number_or_null(t.bounds.fnr_bound_rhs)},
            {"final_q", q_json(t.final_q)},
        });
        reg_r.push_back(t.regret.realized);
        reg_e.push_back(t.regret.expected);
        err.push_back(t.error_rate);
        fpr.push_back(f.fpr_gap);
        fnr.push_back(f.fnr_gap);
        eer.push_back(f.eer_gap);
    }
    const ordered_json doc = {
        {"config", config_echo(result.config)},
        {"run", resolved_run(result.config)},
        {"trial_count", result.trials.size()},
        {"rounds", result.mean_regret_realized_per_t.size()},
        {"trials", trials},
        {"aggregate",
         {
             {"regret_realized", aggregate_json(aggregate(reg_r))},
             {"regret_expected", aggregate_json(aggregate(reg_e))},
             {"error_rate", aggregate_json(aggregate(err))},
             {"fpr_gap", aggregate_json(aggregate(fpr))},
             {"fnr_gap", aggregate_json(aggregate(fnr))},
             {"eer_gap", aggregate_json(aggregate(eer))},
         }},
    };
    return doc.dump(2) + "\n";
}

std::string rounds_csv(const ExperimentResult& result) {
    const auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    const std::string engine(to_string(result.config.run.engine));
    std::string out = "t,engine,trial_mean_regret_realized,trial_mean_regret_expected,fpr_gap,fnr_gap,eer_gap,q_a_neg,q_b_neg\n";
    for (std::size_t i = 0; i < result.mean_regret_realized_per_t.size(); ++i) {
        out += std::to_string(i + 1) + ',' + engine + ',' + format_double(result.mean_regret_realized_per_t[i]) + ',' +
               format_double(result.mean_regret_expected_per_t[i]) + ',' + cell(result.mean_fpr_gap[i]) + ',' +
               cell(result.mean_fnr_gap[i]) + ',' + cell(result.mean_eer_gap[i]) + ',' + cell(result.mean_q_a_neg[i]) +
               ',' + cell(result.mean_q_b_neg[i]) + '\n';
    }
    return out;
}

std::string bounds_json(const ExperimentResult& result) {
    ordered_json trials = ordered_json::array();
    for (const auto& t : result.trials) {
        ordered_json entry = {{"trial", t.trial}};
        entry["report"] = ordered_json::parse(bound_report_json(t.bounds));
        trials.push_back(std::move(entry));
    }
    const ordered_json doc = {{"tolerance", kBoundTolerance}, {"trials", trials}};
    return doc.dump(2) + "\n";
}

}  // namespace fairmw
