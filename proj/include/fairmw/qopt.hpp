#pragma once

#include <array>
#include <cstddef>

#include "fairmw/domain.hpp"
#include "fairmw/estimators.hpp"

namespace fairmw {

/// Running alpha sums in constraint-column order.
struct AlphaSums {
    double a_neg = 0.0;
    double b_neg = 0.0;
    double a_pos = 0.0;
    double b_pos = 0.0;

    static AlphaSums from_cells(const CellValues& cells) noexcept;
};

/// Rows: fpr, fnr, regret. Columns: q_{A,-}, q_{B,-}, q_{A,+}, q_{B,+}.
struct ConstraintSystem {
    std::array<std::array<double, 4>, 3> matrix{};
    std::array<double, 3> rhs{};
    std::array<double, 3> lambda{1.0, 1.0, 1.0};
};

/// Builds A from the alpha sums and the estimates of p and mu_{z,+} over
/// t_elapsed rounds; b is the tolerance vector. Throws NonFiniteInput on
/// non-finite input, InvalidArgument when p or mu are outside (0,1) or t is 0.
ConstraintSystem assemble_constraint_system(const AlphaSums& alpha, double p_hat, double mu_a, double mu_b,
                                            std::size_t t_elapsed, const std::array<double, 3>& b_tolerance,
                                            const std::array<double, 3>& lambda);

/// Coefficient of the proximal term pulling q toward uniform. Scaled by
/// max(lambda_i^2) so that rescaling lambda rescales the whole objective.
double proximal_weight(const std::array<double, 3>& lambda) noexcept;
inline constexpr double kProximalBase = 1e-8;

/// ||lambda o (A q - b)||^2 + proximal_weight * ||q - 1/2||^2, with
/// q = (a_neg, b_neg, 1 - a_neg, 1 - b_neg).
double q_objective(const ConstraintSystem& system, double a_neg, double b_neg);

/// Exact minimizer of q_objective over [0,1]^2.
QDistribution solve_q(const ConstraintSystem& system);

}  // namespace fairmw
