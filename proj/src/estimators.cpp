#include "fairmw/estimators.hpp"

#include <cmath>
#include <numeric>

#include "fairmw/error.hpp"

namespace fairmw {

namespace {

void check_total(const CellCounts& counts, std::size_t t) {
    if (std::accumulate(counts.begin(), counts.end(), std::size_t{0}) != t) {
        throw Error(ErrorKind::InvalidArgument, "cell counts must sum to t");
    }
}

}  // namespace

CellValues frequentist_rate(const CellCounts& counts, std::size_t t) {
    if (t == 0) throw Error(ErrorKind::NoObservations, "frequentist rate undefined before the first round");
    check_total(counts, t);
    CellValues rates{};
    for (std::size_t c = 0; c < kCells; ++c) rates[c] = static_cast<double>(counts[c]) / static_cast<double>(t);
    return rates;
}

CellValues dirichlet_rate(const CellCounts& counts, std::size_t t, double prior) {
    if (!(prior > 0.0) || !std::isfinite(prior)) throw Error(ErrorKind::InvalidArgument, "prior must be positive");
    check_total(counts, t);
    CellValues rates{};
    const double denom = static_cast<double>(t) + kCells * prior;
    for (std::size_t c = 0; c < kCells; ++c) rates[c] = (static_cast<double>(counts[c]) + prior) / denom;
    return rates;
}

RateEstimates::RateEstimates(double prior) : prior_(prior) {
    if (!(prior > 0.0) || !std::isfinite(prior)) throw Error(ErrorKind::InvalidArgument, "prior must be positive");
}

void RateEstimates::observe(GroupId g, Label y) noexcept {
    ++counts_[cell_index(g, y)];
    ++rounds_;
}

std::size_t RateEstimates::rounds(GroupId g) const noexcept {
    return counts_[cell_index(g, Label::negative)] + counts_[cell_index(g, Label::positive)];
}

double RateEstimates::p_hat() const noexcept {
    const double in_a = static_cast<double>(rounds(GroupId::A)) + 2 * prior_;
    return in_a / (static_cast<double>(rounds_) + kCells * prior_);
}

double RateEstimates::mu_hat(GroupId g) const noexcept {
    const double pos = static_cast<double>(counts_[cell_index(g, Label::positive)]) + prior_;
    return pos / (static_cast<double>(rounds(g)) + 2 * prior_);
}

AlphaContribution alpha_step(const WeightTable& weights, std::span<const double> losses, GroupId group, Label label) {
    if (weights.kind() != TableKind::full) throw Error(ErrorKind::InvalidArgument, "alpha needs a full weight table");
    const double right = weights.expected_loss(WeightTable::slice_of(group, label), losses);
    const double wrong = weights.expected_loss(WeightTable::slice_of(group, flip(label)), losses);
    AlphaContribution step;
    step.alpha[cell_index(group, flip(label))] = wrong - right;
    return step;
}

void AlphaTracker::record(const AlphaContribution& step) noexcept {
    for (std::size_t c = 0; c < kCells; ++c) sums_[c] += step.alpha[c];
    last_ = step.alpha;
}

}  // namespace fairmw
