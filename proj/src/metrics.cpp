#include "fairmw/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fairmw/error.hpp"

namespace fairmw {

double gamma(double eta) {
    if (!(eta > 0.0 && eta <= 0.5)) throw Error(ErrorKind::DomainError, "gamma(eta) needs eta in (0, 1/2]");
    return std::log1p(-eta) / std::log1p(-eta * (1.0 + eta));
}

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> gap(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a || !b) return std::nullopt;
    return std::abs(*a - *b);
}

}  // namespace

FairnessReport compute_rates(const std::array<Confusion, 2>& confusion) {
    const Confusion& a = confusion[0];
    const Confusion& b = confusion[1];
    FairnessReport r;
    r.fpr_a = ratio(a.fp, a.fp + a.tn);
    r.fpr_b = ratio(b.fp, b.fp + b.tn);
    r.fnr_a = ratio(a.fn, a.fn + a.tp);
    r.fnr_b = ratio(b.fn, b.fn + b.tp);
    r.err_a = ratio(a.fp + a.fn, a.total());
    r.err_b = ratio(b.fp + b.fn, b.total());
    r.fpr_gap = gap(r.fpr_a, r.fpr_b);
    r.fnr_gap = gap(r.fnr_a, r.fnr_b);
    r.eer_gap = gap(r.err_a, r.err_b);
    return r;
}

FairnessReport compute_rates(const Trajectory& trajectory) {
    return compute_rates({trajectory.confusion(GroupId::A), trajectory.confusion(GroupId::B)});
}

bool epsilon_fairness_check(const FairnessReport& report, double epsilon) {
    if (!report.fpr_gap || !report.fnr_gap) throw Error(ErrorKind::UndefinedGap, "fpr or fnr gap is undefined");
    return *report.fpr_gap <= epsilon && *report.fnr_gap <= epsilon;
}

RegretValue regret(const Trajectory& trajectory) {
    if (trajectory.rounds() == 0) throw Error(ErrorKind::EmptyTrajectory, "regret of an empty trajectory");
    const double best = trajectory.expert_loss(trajectory.best_expert());
    return {trajectory.loss_realized() - best, trajectory.loss_expected() - best};
}

std::string_view to_string(BoundKind kind) noexcept {
    switch (kind) {
        case BoundKind::theorem1: return "theorem1";
        case BoundKind::lemma1: return "lemma1";
        case BoundKind::lemma2: return "lemma2";
    }
    return "theorem1";
}

std::string Margin::where() const {
    std::string s(to_string(bound));
    if (group) {
        s += " cell=";
        s += group_name(*group);
        if (label) s += label_sign(*label);
    }
    if (expert) s += " expert=" + std::to_string(*expert);
    return s;
}

std::optional<Margin> BoundReport::first_violation(double tolerance) const {
    for (const auto& m : margins) {
        if (!(m.value >= -tolerance)) return m;
    }
    return std::nullopt;
}

std::optional<double> BoundReport::min_margin(BoundKind kind) const {
    std::optional<double> best;
    for (const auto& m : margins) {
        if (m.bound == kind && (!best || m.value < *best)) best = m.value;
    }
    return best;
}

std::vector<Margin> theorem1_margins(const Trajectory& t) {
    const double log_term = std::log(static_cast<double>(t.experts())) / t.eta();
    std::vector<Margin> margins;
    switch (t.engine()) {
        case EngineKind::mw:
            for (std::size_t f = 0; f < t.experts(); ++f) {
                const double rhs = (1.0 + t.eta()) * t.expert_loss(f) + log_term;
                margins.push_back({BoundKind::theorem1, std::nullopt, std::nullopt, f, rhs - t.loss_expected()});
            }
            break;
        case EngineKind::group_aware:
            for (GroupId g : kGroups) {
                for (std::size_t f = 0; f < t.experts(); ++f) {
                    const double rhs = (1.0 + t.eta()) * t.expert_loss(f, g) + log_term;
                    margins.push_back({BoundKind::theorem1, g, std::nullopt, f, rhs - t.loss_expected(g)});
                }
            }
            break;
        case EngineKind::fairness_aware:
            throw Error(ErrorKind::EngineMismatch, "theorem1 margins apply to the mw and group_aware engines");
    }
    return margins;
}

std::vector<Margin> lemma_margins(const Trajectory& t) {
    if (t.engine() != EngineKind::fairness_aware) {
        throw Error(ErrorKind::EngineMismatch, "lemma margins apply to the fairness_aware engine only");
    }
    const double log_term = std::log(static_cast<double>(t.experts())) / t.eta();
    const double g_eta = gamma(t.eta());
    std::vector<Margin> margins;
    for (GroupId g : kGroups) {
        for (Label y : kLabels) {
            const double right = t.right_table_expected_loss(g, y);
            for (std::size_t f = 0; f < t.experts(); ++f) {
                const double upper = (1.0 + t.eta()) * t.expert_loss(f, g, y) + log_term;
                margins.push_back({BoundKind::lemma1, g, y, f, upper - right});
            }
            const std::size_t best = t.best_expert(g, y);
            margins.push_back({BoundKind::lemma2, g, y, best, right - g_eta * t.expert_loss(best, g, y)});
        }
    }
    return margins;
}

std::optional<double> measured_epsilon(const Trajectory& t) {
    double eps = 0.0;
    for (Label y : kLabels) {
        const std::size_t ca = t.count(GroupId::A, y);
        const std::size_t cb = t.count(GroupId::B, y);
        if (ca == 0 || cb == 0) return std::nullopt;
        for (std::size_t f = 0; f < t.experts(); ++f) {
            const double ra = t.expert_loss(f, GroupId::A, y) / static_cast<double>(ca);
            const double rb = t.expert_loss(f, GroupId::B, y) / static_cast<double>(cb);
            eps = std::max(eps, std::abs(ra - rb));
        }
    }
    return eps;
}

namespace {

// |(1 + eta - gamma) m_B + eps (1 + eta) + (q_{A,y} S_{A,y} / (pA T) - q_{B,y} S_{B,y} / (pB T))|
// where m_B is the best per-cell error rate on (B, y), S the alpha sums and
// pA, pB the estimated arrival probabilities of the (A, y), (B, y) cells.
std::optional<double> fairness_rhs(const Trajectory& t, Label y, double epsilon, double g_eta,
                                   const QDistribution& q, const RateEstimates& est) {
    const std::size_t c_b = t.count(GroupId::B, y);
    if (c_b == 0 || t.rounds() == 0) return std::nullopt;
    const double best_rate = t.expert_loss(t.best_expert(GroupId::B, y), GroupId::B, y) / static_cast<double>(c_b);
    const double p = est.p_hat();
    const auto label_share = [&](GroupId g) {
        const double mu = est.mu_hat(g);
        return y == Label::positive ? mu : 1.0 - mu;
    };
    const double horizon = static_cast<double>(t.rounds());
    const double sum_a = t.alpha_sums()[cell_index(GroupId::A, y)];
    const double sum_b = t.alpha_sums()[cell_index(GroupId::B, y)];
    const double q_a = q.of(GroupId::A, y);
    const double q_b = q.of(GroupId::B, y);
    const double balance = q_a * sum_a / (p * label_share(GroupId::A) * horizon) -
                           q_b * sum_b / ((1.0 - p) * label_share(GroupId::B) * horizon);
    const double eta = t.eta();
    return std::abs((1.0 + eta - g_eta) * best_rate + epsilon * (1.0 + eta) + balance);
}

}  // namespace

BoundReport validate_bounds(const Trajectory& t, const BoundOptions& options) {
    BoundReport report;
    report.engine = t.engine();
    report.eta = t.eta();
    report.gamma_eta = gamma(t.eta());
    report.log_term = std::log(static_cast<double>(t.experts())) / t.eta();
    if (t.engine() == EngineKind::fairness_aware) {
        report.margins = lemma_margins(t);
        report.epsilon = options.epsilon ? options.epsilon : measured_epsilon(t);
        const auto q = t.last_q();
        if (report.epsilon && q) {
            const RateEstimates est = t.estimates();
            report.fpr_bound_rhs = fairness_rhs(t, Label::negative, *report.epsilon, report.gamma_eta, *q, est);
            report.fnr_bound_rhs = fairness_rhs(t, Label::positive, *report.epsilon, report.gamma_eta, *q, est);
        }
    } else {
        report.margins = theorem1_margins(t);
        report.epsilon = options.epsilon ? options.epsilon : measured_epsilon(t);
    }
    return report;
}

}  // namespace fairmw
