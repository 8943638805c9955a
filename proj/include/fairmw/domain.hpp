#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fairmw {

// Sensitive group and binary label. Iteration order is always A < B and
// negative < positive.
enum class GroupId : std::uint8_t { A = 0, B = 1 };
enum class Label : std::uint8_t { negative = 0, positive = 1 };

inline constexpr std::array<GroupId, 2> kGroups{GroupId::A, GroupId::B};
inline constexpr std::array<Label, 2> kLabels{Label::negative, Label::positive};

/// Number of (group, label) cells.
inline constexpr std::size_t kCells = 4;

/// Cell layout used by every per-cell array: (A,-), (A,+), (B,-), (B,+).
constexpr std::size_t cell_index(GroupId g, Label y) noexcept {
    return 2 * static_cast<std::size_t>(g) + static_cast<std::size_t>(y);
}
constexpr GroupId cell_group(std::size_t cell) noexcept { return cell < 2 ? GroupId::A : GroupId::B; }
constexpr Label cell_label(std::size_t cell) noexcept {
    return cell % 2 == 0 ? Label::negative : Label::positive;
}

constexpr Label flip(Label y) noexcept {
    return y == Label::positive ? Label::negative : Label::positive;
}
constexpr GroupId other(GroupId g) noexcept { return g == GroupId::A ? GroupId::B : GroupId::A; }

constexpr int label_value(Label y) noexcept { return y == Label::positive ? 1 : 0; }
constexpr Label label_from_bool(bool positive) noexcept {
    return positive ? Label::positive : Label::negative;
}
constexpr char group_name(GroupId g) noexcept { return g == GroupId::A ? 'A' : 'B'; }
constexpr char label_sign(Label y) noexcept { return y == Label::positive ? '+' : '-'; }

/// "A-", "B+", ...
std::string cell_name(std::size_t cell);

struct Example {
    std::vector<double> features;
    GroupId group = GroupId::A;
    Label label = Label::negative;

    bool operator==(const Example&) const = default;
};

/// A loss value in [0, 1]. Construction rejects anything else.
class Loss {
public:
    explicit Loss(double value);
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// w * (1 - eta)^loss.
double mw_weight_update(double weight, double eta, Loss loss);

/// min(sqrt(ln d / T), 0.49).
double recommended_eta(std::size_t horizon, std::size_t experts);

inline constexpr double kEtaCap = 0.49;
inline constexpr double kWeightFloor = 1e-300;
// A slice whose largest entry falls below this is rescaled by its max.
inline constexpr double kRenormalizeBelow = 1e-200;

enum class TableKind { flat, grouped, full };

/// Positive weights indexed by expert, (expert, group) or (expert, group, label).
/// Storage is slice-major: each slice holds the d weights of one group or one
/// (group, label) pair contiguously.
class WeightTable {
public:
    WeightTable(TableKind kind, std::size_t experts);

    TableKind kind() const noexcept { return kind_; }
    std::size_t experts() const noexcept { return experts_; }
    std::size_t slice_count() const noexcept;

    static std::size_t slice_of(GroupId g) noexcept { return static_cast<std::size_t>(g); }
    static std::size_t slice_of(GroupId g, Label y) noexcept { return cell_index(g, y); }

    std::span<const double> slice(std::size_t s) const;
    std::span<const double> entries() const noexcept { return weights_; }

    /// Sum of the slice, always > 0.
    double normalizer(std::size_t s) const;
    /// Normalized slice, i.e. the selection distribution it induces.
    std::vector<double> distribution(std::size_t s) const;
    /// sum_f (w_f / Phi) * losses[f]
    double expected_loss(std::size_t s, std::span<const double> losses) const;

    /// Multiplies each weight of the slice by (1 - eta)^losses[f]. If the slice
    /// max has dropped below kRenormalizeBelow the slice is divided by its
    /// max (selection probabilities unchanged), then entries are floored at
    /// kWeightFloor.
    void update_slice(std::size_t s, double eta, std::span<const double> losses);

    bool operator==(const WeightTable&) const = default;

private:
    TableKind kind_;
    std::size_t experts_;
    std::vector<double> weights_;
};

/// Table-selection probabilities q_{z,y}, normalized within each group.
struct QDistribution {
    double a_neg = 0.5;
    double b_neg = 0.5;
    double a_pos = 0.5;
    double b_pos = 0.5;

    static QDistribution uniform() noexcept { return {}; }
    static QDistribution from_negatives(double a_neg, double b_neg);

    double of(GroupId g, Label y) const noexcept;
    double neg(GroupId g) const noexcept { return of(g, Label::negative); }
    bool valid(double tolerance = 1e-12) const noexcept;

    bool operator==(const QDistribution&) const = default;
};

enum class EngineKind { mw, group_aware, fairness_aware };

std::string_view to_string(EngineKind kind) noexcept;
/// Throws ConfigError on an unknown name.
EngineKind parse_engine(std::string_view name);

struct RunConfig {
    EngineKind engine = EngineKind::mw;
    /// Rounds per trial. 0 means "the whole stream" for dataset-backed runs.
    std::size_t horizon = 0;
    /// Empty means recommended_eta(T, d).
    std::optional<double> eta;
    std::uint64_t seed = 0;
    std::size_t trials = 1;
    /// Weights of the fpr, fnr and regret rows.
    std::array<double, 3> lambda{1.0, 1.0, 1.0};
    std::array<double, 3> b_tolerance{0.0, 0.0, 0.0};
    double dirichlet_alpha = 1.0;
    std::size_t q_recompute_stride = 1;
    /// (delta_p, delta_n) budgets, reporting only.
    std::array<double, 2> fairness_budget{0.05, 0.05};
    bool allow_empty = false;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
    double eta_for(std::size_t horizon, std::size_t experts) const;
};

}  // namespace fairmw
