#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "fairmw/domain.hpp"

namespace fairmw {

using CellCounts = std::array<std::size_t, kCells>;
using CellValues = std::array<double, kCells>;

/// q_{z,k} = c_{z,k} / t. Throws NoObservations when t == 0.
CellValues frequentist_rate(const CellCounts& counts, std::size_t t);

/// (c_{z,k} + prior) / (t + 4 prior) over the four cells.
CellValues dirichlet_rate(const CellCounts& counts, std::size_t t, double prior);

/// Running arrival counts with Dirichlet-smoothed estimates of p, mu_{z,+}
/// and the cell rates.
class RateEstimates {
public:
    explicit RateEstimates(double prior = 1.0);

    void observe(GroupId g, Label y) noexcept;

    const CellCounts& counts() const noexcept { return counts_; }
    std::size_t rounds() const noexcept { return rounds_; }
    std::size_t rounds(GroupId g) const noexcept;
    double prior() const noexcept { return prior_; }

    CellValues cell_rates() const { return dirichlet_rate(counts_, rounds_, prior_); }
    /// Probability of group A: sum of the two A cell rates.
    double p_hat() const noexcept;
    /// Group-conditional posterior (c_{z,+} + prior) / (t_z + 2 prior).
    double mu_hat(GroupId g) const noexcept;

private:
    CellCounts counts_{};
    std::size_t rounds_ = 0;
    double prior_;
};

/// One round's alpha gaps. Only the cell (group, flip(label)) can be nonzero:
/// an arrival with label y measures how much worse the opposite-label slice
/// would have done on it.
struct AlphaContribution {
    CellValues alpha{};
};

/// alpha for an arrival (z, y) with per-expert losses, using the pre-update
/// slices of a full weight table:
///   alpha_{z,flip(y)} = E_{w(z,flip(y))}[loss] - E_{w(z,y)}[loss]
AlphaContribution alpha_step(const WeightTable& weights, std::span<const double> losses, GroupId group, Label label);

class AlphaTracker {
public:
    void record(const AlphaContribution& step) noexcept;

    const CellValues& sums() const noexcept { return sums_; }
    const CellValues& last() const noexcept { return last_; }
    double sum(GroupId g, Label y) const noexcept { return sums_[cell_index(g, y)]; }

private:
    CellValues sums_{};
    CellValues last_{};
};

}  // namespace fairmw
