#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fairmw/domain.hpp"
#include "fairmw/engines.hpp"

namespace fairmw {

/// ln(1 - eta) / ln(1 - eta (1 + eta)). Defined on (0, 1/2]; DomainError
/// elsewhere.
double gamma(double eta);

/// Margins below -kBoundTolerance count as violations.
inline constexpr double kBoundTolerance = 1e-9;

struct FairnessReport {
    std::optional<double> fpr_a, fpr_b;
    std::optional<double> fnr_a, fnr_b;
    std::optional<double> err_a, err_b;
    std::optional<double> fpr_gap, fnr_gap, eer_gap;
};

/// FPR = FP/(FP+TN), FNR = FN/(FN+TP), err = (FP+FN)/n per group; a rate is
/// missing when its denominator is 0 and a gap is missing when either side is.
FairnessReport compute_rates(const std::array<Confusion, 2>& confusion);
FairnessReport compute_rates(const Trajectory& trajectory);

/// fpr_gap <= epsilon && fnr_gap <= epsilon. UndefinedGap if either is missing.
bool epsilon_fairness_check(const FairnessReport& report, double epsilon);

struct RegretValue {
    double realized = 0.0;
    double expected = 0.0;
};

/// L_alg - min_f L_f for both loss variants. EmptyTrajectory on no rounds.
RegretValue regret(const Trajectory& trajectory);

enum class BoundKind { theorem1, lemma1, lemma2 };
std::string_view to_string(BoundKind kind) noexcept;

/// rhs - lhs of one inequality; >= 0 means it holds.
struct Margin {
    BoundKind bound = BoundKind::theorem1;
    std::optional<GroupId> group;
    std::optional<Label> label;
    std::optional<std::size_t> expert;
    double value = 0.0;

    std::string where() const;
};

struct BoundOptions {
    /// Per-expert fairness level; measured from the trajectory when absent.
    std::optional<double> epsilon;
};

struct BoundReport {
    EngineKind engine = EngineKind::mw;
    double eta = 0.0;
    double gamma_eta = 0.0;
    /// ln d / eta
    double log_term = 0.0;
    std::vector<Margin> margins;
    std::optional<double> epsilon;
    std::optional<double> fpr_bound_rhs;
    std::optional<double> fnr_bound_rhs;

    std::optional<Margin> first_violation(double tolerance) const;
    std::optional<double> min_margin(BoundKind kind) const;
};

/// Upper and lower per-cell bounds for a fairness-aware trajectory, computed
/// on the right-table expected-loss series:
///   lemma1: (1+eta) L_{f,z,y} + ln d / eta - R_{z,y}   for every f
///   lemma2: R_{z,y} - gamma(eta) L_{f*(z,y),z,y}
/// EngineMismatch for the other engines.
std::vector<Margin> lemma_margins(const Trajectory& trajectory);

/// Expected-loss MW bound (1+eta) L_f + ln d / eta - sum_t E[loss^t]: over all
/// rounds for mw, per group for group_aware. EngineMismatch for fairness_aware.
std::vector<Margin> theorem1_margins(const Trajectory& trajectory);

/// Max over experts and labels of |L_{f,A,y}/C_{A,y} - L_{f,B,y}/C_{B,y}|;
/// missing until every cell has been observed.
std::optional<double> measured_epsilon(const Trajectory& trajectory);

/// Every applicable margin plus the plug-in fairness-bound right-hand sides.
BoundReport validate_bounds(const Trajectory& trajectory, const BoundOptions& options = {});

}  // namespace fairmw
