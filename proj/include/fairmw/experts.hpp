#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fairmw/domain.hpp"
#include "fairmw/rng.hpp"

namespace fairmw {

/// Per-cell probability that a synthetic expert predicts the wrong label,
/// stored in cell_index order.
struct ErrorProfile {
    std::array<double, kCells> error{};

    static ErrorProfile uniform(double e) { return {{e, e, e, e}}; }
    double at(GroupId g, Label y) const noexcept { return error[cell_index(g, y)]; }
    /// Largest |e_{A,y} - e_{B,y}| over both labels.
    double max_group_gap() const noexcept;
    void validate() const;
};

/// Flips the true label with probability e_{z,y}. Always consumes one draw.
Label synthetic_predict(const ErrorProfile& profile, const Example& example, Rng& rng);

// Built-in experts -----------------------------------------------------------

enum class BuiltinKind { logistic, stump };

struct BuiltinOptions {
    BuiltinKind kind = BuiltinKind::logistic;
    std::size_t epochs = 500;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    /// Append the group indicator (1 for A) to the features.
    bool include_group = true;
};

/// Logistic regression on standardized features.
struct LogisticModel {
    std::vector<double> mean;
    std::vector<double> scale;
    std::vector<double> weights;
    double bias = 0.0;
    bool include_group = true;

    double probability(const Example& example) const;
    Label predict(const Example& example) const;
};

/// x[feature] > threshold ? above : below. A constant stump predicts `below`
/// everywhere.
struct StumpModel {
    std::size_t feature = 0;
    double threshold = 0.0;
    Label above = Label::positive;
    Label below = Label::negative;
    bool constant = false;
    bool include_group = true;

    Label predict(const Example& example) const;
};

using TrainedExpert = std::variant<LogisticModel, StumpModel>;

/// Full-batch gradient descent on log-loss (logistic) or exhaustive
/// single-feature threshold search (stump). Throws DegenerateData on an empty
/// split or when there are no features to learn from.
TrainedExpert train_builtin(std::span<const Example> training, const BuiltinOptions& options);
Label predict(const TrainedExpert& expert, const Example& example);
std::string_view to_string(BuiltinKind kind) noexcept;

// Ensembles ------------------------------------------------------------------

struct SyntheticSource {
    std::vector<ErrorProfile> profiles;
};

/// Recorded predictions, rows[t][f].
struct PredictionTable {
    std::vector<std::vector<Label>> rows;
};

struct BuiltinSource {
    std::vector<TrainedExpert> models;
};

/// d >= 2 named experts. Immutable; any randomness comes from the caller's rng.
class ExpertEnsemble {
public:
    using Source = std::variant<SyntheticSource, PredictionTable, BuiltinSource>;

    static ExpertEnsemble synthetic(std::vector<std::string> names, std::vector<ErrorProfile> profiles);
    static ExpertEnsemble recorded(std::vector<std::string> names, std::vector<std::vector<Label>> rows);
    static ExpertEnsemble builtin(std::vector<std::string> names, std::vector<TrainedExpert> models);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const Source& source() const noexcept { return source_; }
    /// Number of recorded rounds; empty for sources that cover any round.
    std::optional<std::size_t> round_count() const;
    /// Profiles of a synthetic ensemble, nullptr otherwise.
    const std::vector<ErrorProfile>* profiles() const;

    /// Fills `out` (size d) with the predictions for round `round` (0-based).
    /// Throws StreamExhausted past the last recorded round.
    void predict(std::size_t round, const Example& example, Rng& rng, std::span<Label> out) const;

private:
    ExpertEnsemble(std::vector<std::string> names, Source source);

    std::vector<std::string> names_;
    Source source_;
};

/// Predictions file: header of expert names, then one row of d "0"/"1" cells
/// per round. LF or CRLF.
ExpertEnsemble parse_prediction_file(std::string_view text);
ExpertEnsemble load_prediction_file(const std::filesystem::path& path);

}  // namespace fairmw
