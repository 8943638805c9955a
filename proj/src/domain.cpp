#include "fairmw/domain.hpp"

#include <algorithm>
#include <cmath>

#include "fairmw/error.hpp"

namespace fairmw {

std::string cell_name(std::size_t cell) {
    return {group_name(cell_group(cell)), label_sign(cell_label(cell))};
}

Loss::Loss(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "loss must lie in [0, 1], got " + std::to_string(value));
    }
}

double mw_weight_update(double weight, double eta, Loss loss) {
    if (loss.value() == 0.0) return weight;
    return weight * std::pow(1.0 - eta, loss.value());
}

double recommended_eta(std::size_t horizon, std::size_t experts) {
    if (experts < 2) throw Error(ErrorKind::InvalidExpertCount, "need at least 2 experts");
    if (horizon < 1) throw Error(ErrorKind::InvalidHorizon, "horizon must be at least 1");
    const double eta = std::sqrt(std::log(static_cast<double>(experts)) / static_cast<double>(horizon));
    return std::min(eta, kEtaCap);
}

// ---------------------------------------------------------------------------

WeightTable::WeightTable(TableKind kind, std::size_t experts) : kind_(kind), experts_(experts) {
    if (experts < 2) throw Error(ErrorKind::InvalidExpertCount, "need at least 2 experts");
    weights_.assign(slice_count() * experts_, 1.0);
}

std::size_t WeightTable::slice_count() const noexcept {
    switch (kind_) {
        case TableKind::flat: return 1;
        case TableKind::grouped: return 2;
        case TableKind::full: return 4;
    }
    return 1;
}

std::span<const double> WeightTable::slice(std::size_t s) const {
    if (s >= slice_count()) throw Error(ErrorKind::InvalidArgument, "slice index out of range");
    return std::span<const double>(weights_).subspan(s * experts_, experts_);
}

double WeightTable::normalizer(std::size_t s) const {
    double phi = 0.0;
    for (double w : slice(s)) phi += w;
    return phi;
}

std::vector<double> WeightTable::distribution(std::size_t s) const {
    const auto w = slice(s);
    const double phi = normalizer(s);
    std::vector<double> pi(w.size());
    std::transform(w.begin(), w.end(), pi.begin(), [phi](double x) { return x / phi; });
    return pi;
}

double WeightTable::expected_loss(std::size_t s, std::span<const double> losses) const {
    const auto w = slice(s);
    if (losses.size() != w.size()) throw Error(ErrorKind::InvalidArgument, "loss vector size mismatch");
    const double phi = normalizer(s);
    double total = 0.0;
    for (std::size_t f = 0; f < w.size(); ++f) total += (w[f] / phi) * losses[f];
    return total;
}

void WeightTable::update_slice(std::size_t s, double eta, std::span<const double> losses) {
    if (s >= slice_count()) throw Error(ErrorKind::InvalidArgument, "slice index out of range");
    if (losses.size() != experts_) throw Error(ErrorKind::InvalidArgument, "loss vector size mismatch");
    const auto first = weights_.begin() + static_cast<std::ptrdiff_t>(s * experts_);
    const auto last = first + static_cast<std::ptrdiff_t>(experts_);
    for (std::size_t f = 0; f < experts_; ++f) {
        first[static_cast<std::ptrdiff_t>(f)] = mw_weight_update(first[static_cast<std::ptrdiff_t>(f)], eta, Loss(losses[f]));
    }
    const double top = *std::max_element(first, last);
    if (top < kRenormalizeBelow) {
        std::for_each(first, last, [top](double& w) { w /= top; });
    }
    std::for_each(first, last, [](double& w) { w = std::max(w, kWeightFloor); });
}

// ---------------------------------------------------------------------------

QDistribution QDistribution::from_negatives(double a_neg, double b_neg) {
    if (!(a_neg >= 0.0 && a_neg <= 1.0 && b_neg >= 0.0 && b_neg <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "q entries must lie in [0, 1]");
    }
    return {a_neg, b_neg, 1.0 - a_neg, 1.0 - b_neg};
}

double QDistribution::of(GroupId g, Label y) const noexcept {
    if (g == GroupId::A) return y == Label::negative ? a_neg : a_pos;
    return y == Label::negative ? b_neg : b_pos;
}

bool QDistribution::valid(double tolerance) const noexcept {
    const auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    return in_unit(a_neg) && in_unit(b_neg) && in_unit(a_pos) && in_unit(b_pos) &&
           std::abs(a_neg + a_pos - 1.0) <= tolerance && std::abs(b_neg + b_pos - 1.0) <= tolerance;
}

std::string_view to_string(EngineKind kind) noexcept {
    switch (kind) {
        case EngineKind::mw: return "mw";
        case EngineKind::group_aware: return "group_aware";
        case EngineKind::fairness_aware: return "fairness_aware";
    }
    return "mw";
}

EngineKind parse_engine(std::string_view name) {
    if (name == "mw") return EngineKind::mw;
    if (name == "group_aware") return EngineKind::group_aware;
    if (name == "fairness_aware") return EngineKind::fairness_aware;
    throw Error(ErrorKind::ConfigError, "unknown engine '" + std::string(name) + "'");
}

void RunConfig::validate() const {
    if (eta && !(*eta > 0.0 && *eta < 0.5)) {
        throw Error(ErrorKind::ConfigError, "eta must lie in (0, 1/2)");
    }
    if (trials < 1) throw Error(ErrorKind::ConfigError, "trials must be at least 1");
    for (double l : lambda) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw Error(ErrorKind::ConfigError, "lambda entries must be >= 0");
    }
    for (double b : b_tolerance) {
        if (!std::isfinite(b)) throw Error(ErrorKind::ConfigError, "b entries must be finite");
    }
    if (!(dirichlet_alpha > 0.0) || !std::isfinite(dirichlet_alpha)) {
        throw Error(ErrorKind::ConfigError, "dirichlet_alpha must be positive");
    }
    if (q_recompute_stride < 1) throw Error(ErrorKind::ConfigError, "stride must be at least 1");
}

double RunConfig::eta_for(std::size_t rounds, std::size_t experts) const {
    return eta ? *eta : recommended_eta(rounds, experts);
}

}  // namespace fairmw
