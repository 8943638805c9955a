#include "fairmw/experts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fairmw/csv.hpp"
#include "fairmw/error.hpp"

namespace fairmw {

double ErrorProfile::max_group_gap() const noexcept {
    double gap = 0.0;
    for (Label y : kLabels) gap = std::max(gap, std::abs(at(GroupId::A, y) - at(GroupId::B, y)));
    return gap;
}

void ErrorProfile::validate() const {
    for (double e : error) {
        if (!(e >= 0.0 && e <= 1.0)) throw Error(ErrorKind::InvalidArgument, "error rates must lie in [0, 1]");
    }
}

Label synthetic_predict(const ErrorProfile& profile, const Example& example, Rng& rng) {
    const bool wrong = rng.uniform() < profile.at(example.group, example.label);
    return wrong ? flip(example.label) : example.label;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> expert_inputs(const Example& example, bool include_group) {
    std::vector<double> x = example.features;
    if (include_group) x.push_back(example.group == GroupId::A ? 1.0 : 0.0);
    return x;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

LogisticModel train_logistic(std::span<const Example> training, const BuiltinOptions& options) {
    std::vector<std::vector<double>> xs;
    xs.reserve(training.size());
    for (const auto& ex : training) xs.push_back(expert_inputs(ex, options.include_group));
    const std::size_t dim = xs.front().size();
    if (dim == 0) throw Error(ErrorKind::DegenerateData, "logistic expert needs at least one feature");
    const double n = static_cast<double>(xs.size());

    LogisticModel model;
    model.include_group = options.include_group;
    model.mean.assign(dim, 0.0);
    model.scale.assign(dim, 1.0);
    for (const auto& x : xs) {
        for (std::size_t j = 0; j < dim; ++j) model.mean[j] += x[j] / n;
    }
    std::vector<double> var(dim, 0.0);
    for (const auto& x : xs) {
        for (std::size_t j = 0; j < dim; ++j) var[j] += (x[j] - model.mean[j]) * (x[j] - model.mean[j]) / n;
    }
    for (std::size_t j = 0; j < dim; ++j) {
        const double sd = std::sqrt(var[j]);
        model.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    for (auto& x : xs) {
        for (std::size_t j = 0; j < dim; ++j) x[j] = (x[j] - model.mean[j]) / model.scale[j];
    }

    Rng rng(options.seed);
    model.weights.resize(dim);
    for (auto& w : model.weights) w = (rng.uniform() - 0.5) * 0.02;

    std::vector<double> grad(dim);
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const auto& x = xs[i];
            double z = model.bias;
            for (std::size_t j = 0; j < dim; ++j) z += model.weights[j] * x[j];
            const double residual = sigmoid(z) - (training[i].label == Label::positive ? 1.0 : 0.0);
            for (std::size_t j = 0; j < dim; ++j) grad[j] += residual * x[j];
            grad_bias += residual;
        }
        for (std::size_t j = 0; j < dim; ++j) model.weights[j] -= options.learning_rate * grad[j] / n;
        model.bias -= options.learning_rate * grad_bias / n;
    }
    return model;
}

StumpModel train_stump(std::span<const Example> training, const BuiltinOptions& options) {
    StumpModel model;
    model.include_group = options.include_group;

    const auto positives = static_cast<std::size_t>(std::count_if(
        training.begin(), training.end(), [](const Example& e) { return e.label == Label::positive; }));
    if (positives == 0 || positives == training.size()) {
        model.constant = true;
        model.below = model.above = positives == 0 ? Label::negative : Label::positive;
        return model;
    }

    std::vector<std::vector<double>> xs;
    xs.reserve(training.size());
    for (const auto& ex : training) xs.push_back(expert_inputs(ex, options.include_group));
    const std::size_t dim = xs.front().size();
    if (dim == 0) throw Error(ErrorKind::DegenerateData, "stump expert needs at least one feature");

    // Best so far is the majority-label constant.
    const std::size_t n = training.size();
    std::size_t best_errors = std::min(positives, n - positives);
    model.constant = true;
    model.below = model.above = positives * 2 > n ? Label::positive : Label::negative;

    std::vector<std::size_t> order(n);
    for (std::size_t j = 0; j < dim; ++j) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return xs[a][j] < xs[b][j]; });
        // Sweep thresholds between consecutive distinct values. For the
        // "above => positive" polarity, errors = positives below + negatives above.
        std::size_t pos_below = 0;
        std::size_t neg_below = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const auto& ex = training[order[k]];
            (ex.label == Label::positive ? pos_below : neg_below) += 1;
            const double lo = xs[order[k]][j];
            const double hi = xs[order[k + 1]][j];
            if (!(lo < hi)) continue;
            const std::size_t neg_above = (n - positives) - neg_below;
            const std::size_t errors_up = pos_below + neg_above;
            const std::size_t errors_down = n - errors_up;
            if (errors_up < best_errors) {
                best_errors = errors_up;
                model = StumpModel{j, lo + (hi - lo) / 2, Label::positive, Label::negative, false, options.include_group};
            }
            if (errors_down < best_errors) {
                best_errors = errors_down;
                model = StumpModel{j, lo + (hi - lo) / 2, Label::negative, Label::positive, false, options.include_group};
            }
        }
    }
    return model;
}

}  // namespace

double LogisticModel::probability(const Example& example) const {
    const auto x = expert_inputs(example, include_group);
    if (x.size() != weights.size()) throw Error(ErrorKind::InvalidArgument, "feature length mismatch");
    double z = bias;
    for (std::size_t j = 0; j < x.size(); ++j) z += weights[j] * (x[j] - mean[j]) / scale[j];
    return sigmoid(z);
}

Label LogisticModel::predict(const Example& example) const {
    return label_from_bool(probability(example) >= 0.5);
}

Label StumpModel::predict(const Example& example) const {
    if (constant) return below;
    const auto x = expert_inputs(example, include_group);
    if (feature >= x.size()) throw Error(ErrorKind::InvalidArgument, "feature length mismatch");
    return x[feature] > threshold ? above : below;
}

TrainedExpert train_builtin(std::span<const Example> training, const BuiltinOptions& options) {
    if (training.empty()) throw Error(ErrorKind::DegenerateData, "empty training split");
    const std::size_t width = training.front().features.size();
    for (const auto& ex : training) {
        if (ex.features.size() != width) throw Error(ErrorKind::DegenerateData, "ragged feature vectors");
    }
    if (options.kind == BuiltinKind::logistic) return train_logistic(training, options);
    return train_stump(training, options);
}

Label predict(const TrainedExpert& expert, const Example& example) {
    return std::visit([&](const auto& model) { return model.predict(example); }, expert);
}

std::string_view to_string(BuiltinKind kind) noexcept {
    return kind == BuiltinKind::logistic ? "logistic" : "stump";
}

// ---------------------------------------------------------------------------

ExpertEnsemble::ExpertEnsemble(std::vector<std::string> names, Source source)
    : names_(std::move(names)), source_(std::move(source)) {
    if (names_.size() < 2) throw Error(ErrorKind::InvalidExpertCount, "an ensemble needs at least 2 experts");
    std::set<std::string> unique(names_.begin(), names_.end());
    if (unique.size() != names_.size()) throw Error(ErrorKind::InvalidArgument, "expert names must be unique");
}

ExpertEnsemble ExpertEnsemble::synthetic(std::vector<std::string> names, std::vector<ErrorProfile> profiles) {
    if (profiles.size() != names.size()) throw Error(ErrorKind::InvalidArgument, "one profile per expert required");
    for (const auto& p : profiles) p.validate();
    return ExpertEnsemble(std::move(names), SyntheticSource{std::move(profiles)});
}

ExpertEnsemble ExpertEnsemble::recorded(std::vector<std::string> names, std::vector<std::vector<Label>> rows) {
    for (const auto& row : rows) {
        if (row.size() != names.size()) throw Error(ErrorKind::FormatError, "prediction row width mismatch");
    }
    return ExpertEnsemble(std::move(names), PredictionTable{std::move(rows)});
}

ExpertEnsemble ExpertEnsemble::builtin(std::vector<std::string> names, std::vector<TrainedExpert> models) {
    if (models.size() != names.size()) throw Error(ErrorKind::InvalidArgument, "one model per expert required");
    return ExpertEnsemble(std::move(names), BuiltinSource{std::move(models)});
}

std::optional<std::size_t> ExpertEnsemble::round_count() const {
    if (const auto* table = std::get_if<PredictionTable>(&source_)) return table->rows.size();
    return std::nullopt;
}

const std::vector<ErrorProfile>* ExpertEnsemble::profiles() const {
    if (const auto* s = std::get_if<SyntheticSource>(&source_)) return &s->profiles;
    return nullptr;
}

void ExpertEnsemble::predict(std::size_t round, const Example& example, Rng& rng, std::span<Label> out) const {
    if (out.size() != size()) throw Error(ErrorKind::InvalidArgument, "prediction buffer size mismatch");
    if (const auto* s = std::get_if<SyntheticSource>(&source_)) {
        for (std::size_t f = 0; f < size(); ++f) out[f] = synthetic_predict(s->profiles[f], example, rng);
    } else if (const auto* table = std::get_if<PredictionTable>(&source_)) {
        if (round >= table->rows.size()) {
            throw Error(ErrorKind::StreamExhausted, "no recorded predictions for round " + std::to_string(round + 1));
        }
        std::copy(table->rows[round].begin(), table->rows[round].end(), out.begin());
    } else {
        const auto& models = std::get<BuiltinSource>(source_).models;
        for (std::size_t f = 0; f < size(); ++f) out[f] = fairmw::predict(models[f], example);
    }
}

ExpertEnsemble parse_prediction_file(std::string_view text) {
    const auto records = parse_csv(text);
    if (records.empty()) throw Error(ErrorKind::FormatError, "missing header row");
    std::vector<std::string> names = records.front();
    for (const auto& name : names) {
        if (name.empty()) throw Error(ErrorKind::FormatError, "empty expert name in header");
    }
    std::vector<std::vector<Label>> rows;
    rows.reserve(records.size() - 1);
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != names.size()) {
            throw Error(ErrorKind::FormatError, "row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                                                    " cells, expected " + std::to_string(names.size()));
        }
        std::vector<Label> row(rec.size());
        for (std::size_t c = 0; c < rec.size(); ++c) {
            if (rec[c] != "0" && rec[c] != "1") {
                throw Error(ErrorKind::FormatError, "row " + std::to_string(r) + ", column " + std::to_string(c + 1) +
                                                        " (" + names[c] + "): expected 0 or 1, got '" + rec[c] + "'");
            }
            row[c] = label_from_bool(rec[c] == "1");
        }
        rows.push_back(std::move(row));
    }
    try {
        return ExpertEnsemble::recorded(std::move(names), std::move(rows));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::FormatError) throw;
        throw Error(ErrorKind::FormatError, e.what());
    }
}

ExpertEnsemble load_prediction_file(const std::filesystem::path& path) {
    return parse_prediction_file(read_file(path));
}

}  // namespace fairmw
