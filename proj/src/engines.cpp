#include "fairmw/engines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairmw/error.hpp"
#include "fairmw/qopt.hpp"

namespace fairmw {

double zero_one_loss(Label predicted, Label truth) noexcept { return predicted == truth ? 0.0 : 1.0; }

void Confusion::add(Label truth, Label predicted) noexcept {
    if (truth == Label::positive) {
        (predicted == Label::positive ? tp : fn) += 1;
    } else {
        (predicted == Label::positive ? fp : tn) += 1;
    }
}

// ---------------------------------------------------------------------------

Trajectory::Trajectory(EngineKind engine, std::vector<std::string> expert_names, double eta, double dirichlet_alpha)
    : engine_(engine),
      names_(std::move(expert_names)),
      eta_(eta),
      dirichlet_alpha_(dirichlet_alpha),
      expert_total_(names_.size(), 0.0),
      expert_cell_(names_.size(), CellValues{}) {}

void Trajectory::append(RoundOutcome outcome) {
    if (outcome.per_expert_losses.size() != experts()) {
        throw Error(ErrorKind::InvalidArgument, "outcome carries the wrong number of expert losses");
    }
    if (outcome.expert_chosen >= experts()) throw Error(ErrorKind::InvalidArgument, "chosen expert out of range");
    const std::size_t cell = cell_index(outcome.group, outcome.label);
    const auto g = static_cast<std::size_t>(outcome.group);

    loss_realized_ += outcome.realized_loss;
    loss_expected_ += outcome.expected_loss;
    group_realized_[g] += outcome.realized_loss;
    group_expected_[g] += outcome.expected_loss;
    cell_expected_[cell] += outcome.expected_loss;
    for (std::size_t f = 0; f < experts(); ++f) {
        expert_total_[f] += outcome.per_expert_losses[f];
        expert_cell_[f][cell] += outcome.per_expert_losses[f];
    }
    if (outcome.right_table_expected_loss) right_table_[cell] += *outcome.right_table_expected_loss;
    if (outcome.alpha) alpha_sums_[cell_index(outcome.group, flip(outcome.label))] += *outcome.alpha;
    ++counts_[cell];
    confusion_[g].add(outcome.label, outcome.prediction);
    outcomes_.push_back(std::move(outcome));
}

double Trajectory::expert_loss(std::size_t f, GroupId g) const {
    const auto& cells = expert_cell_.at(f);
    return cells[cell_index(g, Label::negative)] + cells[cell_index(g, Label::positive)];
}

RateEstimates Trajectory::estimates() const {
    RateEstimates est(dirichlet_alpha_);
    for (std::size_t c = 0; c < kCells; ++c) {
        for (std::size_t k = 0; k < counts_[c]; ++k) est.observe(cell_group(c), cell_label(c));
    }
    return est;
}

std::size_t Trajectory::best_expert(GroupId g, Label y) const {
    std::size_t best = 0;
    for (std::size_t f = 1; f < experts(); ++f) {
        if (expert_loss(f, g, y) < expert_loss(best, g, y)) best = f;
    }
    return best;
}

std::size_t Trajectory::best_expert() const {
    return static_cast<std::size_t>(std::min_element(expert_total_.begin(), expert_total_.end()) -
                                    expert_total_.begin());
}

std::optional<QDistribution> Trajectory::last_q() const {
    if (outcomes_.empty()) return std::nullopt;
    return outcomes_.back().q_used;
}

bool Trajectory::meta_equal(const Trajectory& other) const noexcept {
    return engine_ == other.engine_ && names_ == other.names_ && eta_ == other.eta_ &&
           dirichlet_alpha_ == other.dirichlet_alpha_;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> evaluate_losses(const LossFunction& loss, std::span<const Label> predictions, Label truth) {
    std::vector<double> losses(predictions.size());
    for (std::size_t f = 0; f < predictions.size(); ++f) losses[f] = Loss(loss(predictions[f], truth)).value();
    return losses;
}

void check_eta(double eta) {
    if (!(eta > 0.0 && eta <= 0.5)) throw Error(ErrorKind::InvalidArgument, "eta must lie in (0, 1/2]");
}

// Draws from one slice and fills the common outcome fields.
RoundOutcome select_from_slice(const WeightTable& table, std::size_t slice, std::size_t t,
                               std::span<const Label> predictions, std::vector<double> losses, GroupId group,
                               Label truth, Rng& rng) {
    if (predictions.size() != table.experts()) {
        throw Error(ErrorKind::InvalidArgument, "expected one prediction per expert");
    }
    RoundOutcome out;
    out.t = t;
    out.group = group;
    out.label = truth;
    out.expert_chosen = sample_index(table.slice(slice), rng.uniform());
    out.prediction = predictions[out.expert_chosen];
    out.realized_loss = losses[out.expert_chosen];
    out.expected_loss = table.expected_loss(slice, losses);
    out.per_expert_losses = std::move(losses);
    return out;
}

}  // namespace

MwEngine::MwEngine(std::size_t experts, double eta, LossFunction loss)
    : weights_(TableKind::flat, experts), eta_(eta), loss_(std::move(loss)) {
    check_eta(eta);
}

RoundOutcome MwEngine::step(std::size_t t, std::span<const Label> predictions, GroupId group, Label truth,
                            Rng& rng) {
    auto out = select_from_slice(weights_, 0, t, predictions, evaluate_losses(loss_, predictions, truth), group,
                                 truth, rng);
    weights_.update_slice(0, eta_, out.per_expert_losses);
    return out;
}

GroupAwareEngine::GroupAwareEngine(std::size_t experts, double eta, LossFunction loss)
    : weights_(TableKind::grouped, experts), eta_(eta), loss_(std::move(loss)) {
    check_eta(eta);
}

RoundOutcome GroupAwareEngine::step(std::size_t t, std::span<const Label> predictions, GroupId group, Label truth,
                                    Rng& rng) {
    const std::size_t slice = WeightTable::slice_of(group);
    auto out = select_from_slice(weights_, slice, t, predictions, evaluate_losses(loss_, predictions, truth), group,
                                 truth, rng);
    weights_.update_slice(slice, eta_, out.per_expert_losses);
    return out;
}

FairnessAwareEngine::FairnessAwareEngine(std::size_t experts, double eta, double dirichlet_alpha, LossFunction loss)
    : weights_(TableKind::full, experts), eta_(eta), loss_(std::move(loss)), estimates_(dirichlet_alpha) {
    check_eta(eta);
}

RoundOutcome FairnessAwareEngine::step(std::size_t t, std::span<const Label> predictions, GroupId group,
                                       Label truth, const QDistribution& q, Rng& rng) {
    if (!q.valid(1e-9)) throw Error(ErrorKind::InvalidArgument, "q is not a valid distribution");
    // Table first (negative before positive in CDF order), then the expert.
    const Label table = rng.uniform() < q.neg(group) ? Label::negative : Label::positive;
    auto out = select_from_slice(weights_, WeightTable::slice_of(group, table), t, predictions,
                                 evaluate_losses(loss_, predictions, truth), group, truth, rng);
    out.table_chosen = table;
    out.q_used = q;
    out.right_table_expected_loss = weights_.expected_loss(WeightTable::slice_of(group, truth), out.per_expert_losses);

    const AlphaContribution contribution = alpha_step(weights_, out.per_expert_losses, group, truth);
    alpha_.record(contribution);
    out.alpha = contribution.alpha[cell_index(group, flip(truth))];

    weights_.update_slice(WeightTable::slice_of(group, truth), eta_, out.per_expert_losses);
    estimates_.observe(group, truth);
    return out;
}

// ---------------------------------------------------------------------------

Trajectory run_trial(const RunConfig& config, std::span<const Example> stream, const ExpertEnsemble& ensemble,
                     std::uint64_t trial, LossFunction loss) {
    config.validate();
    const std::size_t d = ensemble.size();
    if (stream.empty()) {
        if (!config.allow_empty) throw Error(ErrorKind::StreamExhausted, "empty arrival stream");
        return Trajectory(config.engine, ensemble.names(), config.eta_for(1, d), config.dirichlet_alpha);
    }
    const std::size_t horizon = config.horizon == 0 ? stream.size() : config.horizon;
    if (horizon > stream.size()) {
        throw Error(ErrorKind::StreamExhausted, "horizon " + std::to_string(horizon) + " exceeds stream length " +
                                                    std::to_string(stream.size()));
    }
    if (const auto rounds = ensemble.round_count(); rounds && *rounds < horizon) {
        throw Error(ErrorKind::StreamExhausted, "expert predictions cover " + std::to_string(*rounds) +
                                                    " rounds, horizon is " + std::to_string(horizon));
    }
    const double eta = config.eta_for(horizon, d);

    Rng expert_rng(derive_seed(config.seed, RngStream::experts, trial));
    Rng engine_rng(derive_seed(config.seed, RngStream::engine, trial));
    Trajectory trajectory(config.engine, ensemble.names(), eta, config.dirichlet_alpha);
    std::vector<Label> predictions(d);

    const auto for_each_round = [&](auto&& step) {
        for (std::size_t r = 0; r < horizon; ++r) {
            const Example& ex = stream[r];
            ensemble.predict(r, ex, expert_rng, predictions);
            trajectory.append(step(r, ex));
        }
    };

    switch (config.engine) {
        case EngineKind::mw: {
            MwEngine engine(d, eta, loss);
            for_each_round([&](std::size_t r, const Example& ex) {
                return engine.step(r + 1, predictions, ex.group, ex.label, engine_rng);
            });
            break;
        }
        case EngineKind::group_aware: {
            GroupAwareEngine engine(d, eta, loss);
            for_each_round([&](std::size_t r, const Example& ex) {
                return engine.step(r + 1, predictions, ex.group, ex.label, engine_rng);
            });
            break;
        }
        case EngineKind::fairness_aware: {
            FairnessAwareEngine engine(d, eta, config.dirichlet_alpha, loss);
            QDistribution q = QDistribution::uniform();
            for_each_round([&](std::size_t r, const Example& ex) {
                if (r > 0 && r % config.q_recompute_stride == 0) {
                    const RateEstimates& est = engine.estimates();
                    const ConstraintSystem system = assemble_constraint_system(
                        AlphaSums::from_cells(engine.alpha().sums()), est.p_hat(), est.mu_hat(GroupId::A),
                        est.mu_hat(GroupId::B), r, config.b_tolerance, config.lambda);
                    q = solve_q(system);
                }
                return engine.step(r + 1, predictions, ex.group, ex.label, q, engine_rng);
            });
            break;
        }
    }
    return trajectory;
}

}  // namespace fairmw
