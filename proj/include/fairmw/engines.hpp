#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairmw/domain.hpp"
#include "fairmw/estimators.hpp"
#include "fairmw/experts.hpp"
#include "fairmw/rng.hpp"

namespace fairmw {

/// Bounded loss hook; must return a value in [0, 1].
using LossFunction = std::function<double(Label predicted, Label truth)>;
double zero_one_loss(Label predicted, Label truth) noexcept;

struct RoundOutcome {
    std::size_t t = 0;  // 1-based
    GroupId group = GroupId::A;
    Label label = Label::negative;
    /// Slice that drove selection (fairness-aware only).
    std::optional<Label> table_chosen;
    std::size_t expert_chosen = 0;
    Label prediction = Label::negative;
    double realized_loss = 0.0;
    /// Mean loss under the selection distribution actually used this round.
    double expected_loss = 0.0;
    /// Fairness-aware only: mean loss under the (group, label) slice.
    std::optional<double> right_table_expected_loss;
    /// Fairness-aware only: alpha_{group, flip(label)} of this round.
    std::optional<double> alpha;
    std::vector<double> per_expert_losses;
    std::optional<QDistribution> q_used;

    bool operator==(const RoundOutcome&) const = default;
};

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    void add(Label truth, Label predicted) noexcept;
    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    bool operator==(const Confusion&) const = default;
};

/// Record of one run plus running aggregates. Aggregates are maintained by
/// append() alone, so a trajectory rebuilt from its outcomes is identical.
class Trajectory {
public:
    Trajectory(EngineKind engine, std::vector<std::string> expert_names, double eta, double dirichlet_alpha = 1.0);

    void append(RoundOutcome outcome);

    EngineKind engine() const noexcept { return engine_; }
    const std::vector<std::string>& expert_names() const noexcept { return names_; }
    std::size_t experts() const noexcept { return names_.size(); }
    double eta() const noexcept { return eta_; }
    double dirichlet_alpha() const noexcept { return dirichlet_alpha_; }
    const std::vector<RoundOutcome>& outcomes() const noexcept { return outcomes_; }
    std::size_t rounds() const noexcept { return outcomes_.size(); }

    double loss_realized() const noexcept { return loss_realized_; }
    double loss_expected() const noexcept { return loss_expected_; }
    double loss_realized(GroupId g) const noexcept { return group_realized_[static_cast<std::size_t>(g)]; }
    double loss_expected(GroupId g) const noexcept { return group_expected_[static_cast<std::size_t>(g)]; }
    double loss_expected(GroupId g, Label y) const noexcept { return cell_expected_[cell_index(g, y)]; }

    double expert_loss(std::size_t f) const { return expert_total_.at(f); }
    double expert_loss(std::size_t f, GroupId g) const;
    double expert_loss(std::size_t f, GroupId g, Label y) const { return expert_cell_.at(f)[cell_index(g, y)]; }

    /// sum over rounds in cell (g, y) of the (g, y)-slice expected loss.
    double right_table_expected_loss(GroupId g, Label y) const noexcept { return right_table_[cell_index(g, y)]; }
    const CellValues& alpha_sums() const noexcept { return alpha_sums_; }
    std::size_t count(GroupId g, Label y) const noexcept { return counts_[cell_index(g, y)]; }
    const CellCounts& counts() const noexcept { return counts_; }
    const Confusion& confusion(GroupId g) const noexcept { return confusion_[static_cast<std::size_t>(g)]; }
    /// Dirichlet-smoothed estimates over all rounds seen.
    RateEstimates estimates() const;

    /// argmin_f L_{f,g,y}; lowest index wins ties.
    std::size_t best_expert(GroupId g, Label y) const;
    /// argmin_f L_f.
    std::size_t best_expert() const;

    /// q of the last round (fairness-aware only).
    std::optional<QDistribution> last_q() const;

    bool operator==(const Trajectory& other) const { return outcomes_ == other.outcomes_ && meta_equal(other); }

private:
    bool meta_equal(const Trajectory& other) const noexcept;

    EngineKind engine_;
    std::vector<std::string> names_;
    double eta_;
    double dirichlet_alpha_;
    std::vector<RoundOutcome> outcomes_;

    double loss_realized_ = 0.0;
    double loss_expected_ = 0.0;
    std::array<double, 2> group_realized_{};
    std::array<double, 2> group_expected_{};
    CellValues cell_expected_{};
    std::vector<double> expert_total_;
    std::vector<CellValues> expert_cell_;
    CellValues right_table_{};
    CellValues alpha_sums_{};
    CellCounts counts_{};
    std::array<Confusion, 2> confusion_{};
};

/// JSON form of a trajectory (meta + every outcome).
std::string serialize(const Trajectory& trajectory);
/// Rebuilds a trajectory from serialize() output. Throws FormatError.
Trajectory deserialize_trajectory(std::string_view json);

// Engines ----------------------------------------------------------------------

/// Original MW: one weight per expert.
class MwEngine {
public:
    MwEngine(std::size_t experts, double eta, LossFunction loss = zero_one_loss);

    RoundOutcome step(std::size_t t, std::span<const Label> predictions, GroupId group, Label truth, Rng& rng);
    const WeightTable& weights() const noexcept { return weights_; }

private:
    WeightTable weights_;
    double eta_;
    LossFunction loss_;
};

/// Separate MW instance per group; only the arriving group's slice is used
/// and updated.
class GroupAwareEngine {
public:
    GroupAwareEngine(std::size_t experts, double eta, LossFunction loss = zero_one_loss);

    RoundOutcome step(std::size_t t, std::span<const Label> predictions, GroupId group, Label truth, Rng& rng);
    const WeightTable& weights() const noexcept { return weights_; }

private:
    WeightTable weights_;
    double eta_;
    LossFunction loss_;
};

/// Weight slice per (group, label). The arriving group's positive or
/// negative slice is drawn according to q, an expert is drawn from it, and
/// after the label is revealed only the (group, label) slice is updated.
class FairnessAwareEngine {
public:
    FairnessAwareEngine(std::size_t experts, double eta, double dirichlet_alpha = 1.0,
                        LossFunction loss = zero_one_loss);

    RoundOutcome step(std::size_t t, std::span<const Label> predictions, GroupId group, Label truth,
                      const QDistribution& q, Rng& rng);

    const WeightTable& weights() const noexcept { return weights_; }
    const AlphaTracker& alpha() const noexcept { return alpha_; }
    const RateEstimates& estimates() const noexcept { return estimates_; }

private:
    WeightTable weights_;
    double eta_;
    LossFunction loss_;
    AlphaTracker alpha_;
    RateEstimates estimates_;
};

/// Runs one trial of config.engine over the stream. The horizon is
/// config.horizon, or the whole stream when it is 0; a longer horizon raises
/// StreamExhausted, as does an empty stream unless config.allow_empty.
/// Randomness: experts draw from derive_seed(seed, experts, trial) and the
/// engine from derive_seed(seed, engine, trial).
Trajectory run_trial(const RunConfig& config, std::span<const Example> stream, const ExpertEnsemble& ensemble,
                     std::uint64_t trial = 0, LossFunction loss = zero_one_loss);

}  // namespace fairmw
