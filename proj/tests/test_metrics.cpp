#include <doctest.h>

#include <cmath>

#include "fairmw/error.hpp"
#include "fairmw/metrics.hpp"
#include "support.hpp"

using namespace fairmw;
using testing_support::Gen;

namespace {

RoundOutcome outcome(std::size_t t, GroupId g, Label y, std::size_t chosen, std::vector<double> losses,
                     double expected) {
    RoundOutcome o;
    o.t = t;
    o.group = g;
    o.label = y;
    o.expert_chosen = chosen;
    o.realized_loss = losses[chosen];
    o.prediction = o.realized_loss > 0 ? flip(y) : y;
    o.expected_loss = expected;
    o.per_expert_losses = std::move(losses);
    return o;
}

ExpertEnsemble biased_experts(std::size_t d) {
    std::vector<std::string> names;
    std::vector<ErrorProfile> profiles;
    for (std::size_t f = 0; f < d; ++f) {
        names.push_back("f" + std::to_string(f));
        const double base = 0.05 + 0.08 * static_cast<double>(f);
        profiles.push_back(ErrorProfile{{base, 0.5 - base, base + 0.02, 0.48 - base}});
    }
    return ExpertEnsemble::synthetic(names, profiles);
}

}  // namespace

TEST_CASE("gamma") {
    CHECK(fairmw::gamma(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(fairmw::gamma(0.25) - 0.76778) <= 1e-5);
    const double g = fairmw::gamma(1e-6);
    CHECK(g >= 0.999998);
    CHECK(g < 1.0);
    CHECK_THROWS_AS(fairmw::gamma(0.0), Error);
    CHECK_THROWS_AS(fairmw::gamma(0.6), Error);
    try {
        fairmw::gamma(-1);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DomainError);
    }
}

TEST_CASE("gamma is strictly decreasing and inside (0, 1)") {
    double prev = 2.0;
    for (int i = 0; i < 100; ++i) {
        const double eta = 0.001 + (0.499 - 0.001) * i / 99.0;
        const double g = fairmw::gamma(eta);
        CHECK(g > 0.0);
        CHECK(g < 1.0);
        CHECK(g < prev);
        prev = g;
    }
}

TEST_CASE("compute_rates") {
    SUBCASE("arithmetic") {
        Confusion a{9, 2, 8, 1};
        const auto r = compute_rates({a, a});
        CHECK(*r.fpr_a == doctest::Approx(0.2));
        CHECK(*r.fnr_a == doctest::Approx(0.1));
        CHECK(*r.err_a == doctest::Approx(0.15));
        CHECK(*r.fpr_gap == 0.0);
        CHECK(*r.fnr_gap == 0.0);
        CHECK(*r.eer_gap == 0.0);
    }
    SUBCASE("no negatives in B leaves FPR_B and the gap undefined") {
        const auto r = compute_rates({Confusion{9, 2, 8, 1}, Confusion{5, 0, 0, 2}});
        CHECK_FALSE(r.fpr_b.has_value());
        CHECK_FALSE(r.fpr_gap.has_value());
        CHECK(r.fnr_gap.has_value());
        CHECK_THROWS_AS(epsilon_fairness_check(r, 0.1), Error);
    }
}

TEST_CASE("epsilon_fairness_check") {
    FairnessReport r;
    r.fpr_gap = 0.03;
    r.fnr_gap = 0.04;
    CHECK(epsilon_fairness_check(r, 0.05));
    r.fpr_gap = 0.06;
    r.fnr_gap = 0.01;
    CHECK_FALSE(epsilon_fairness_check(r, 0.05));
    r.fpr_gap = 0.0;
    r.fnr_gap = 0.0;
    CHECK(epsilon_fairness_check(r, 0.0));
}

TEST_CASE("regret") {
    SUBCASE("L_alg = 5 against experts (3, 4, 7)") {
        Trajectory t(EngineKind::mw, {"a", "b", "c"}, 0.1);
        t.append(outcome(1, GroupId::A, Label::positive, 0, {1, 1, 1}, 1));
        t.append(outcome(2, GroupId::A, Label::positive, 0, {1, 1, 1}, 1));
        t.append(outcome(3, GroupId::A, Label::positive, 0, {1, 1, 1}, 1));
        t.append(outcome(4, GroupId::A, Label::positive, 2, {0, 1, 1}, 1));
        t.append(outcome(5, GroupId::A, Label::positive, 2, {0, 0, 1}, 1));
        for (int i = 0; i < 2; ++i) t.append(outcome(6 + i, GroupId::A, Label::positive, 0, {0, 0, 1}, 0));
        CHECK(t.loss_realized() == 5);
        CHECK(regret(t).realized == 2);
        CHECK(regret(t).expected == 2);
    }
    SUBCASE("matching and beating the best expert") {
        Trajectory t(EngineKind::mw, {"a", "b"}, 0.1);
        t.append(outcome(1, GroupId::A, Label::positive, 0, {0, 1}, 0));
        CHECK(regret(t).realized == 0);
        Trajectory u(EngineKind::mw, {"a", "b"}, 0.1);
        u.append(outcome(1, GroupId::A, Label::positive, 0, {0, 1}, 0.5));
        u.append(outcome(2, GroupId::A, Label::positive, 1, {1, 0}, 0.5));
        CHECK(regret(u).realized == -1);
    }
    CHECK_THROWS_AS(regret(Trajectory(EngineKind::mw, {"a", "b"}, 0.1)), Error);
}

TEST_CASE("theorem1 margin by hand") {
    Trajectory t(EngineKind::mw, {"a", "b"}, 0.5);
    t.append(outcome(1, GroupId::A, Label::positive, 0, {1, 0}, 0.5));
    const auto margins = theorem1_margins(t);
    REQUIRE(margins.size() == 2);
    CHECK(margins[1].value == doctest::Approx(std::log(2.0) / 0.5 - 0.5).epsilon(1e-12));
    CHECK(margins[1].value == doctest::Approx(0.886).epsilon(1e-3));
    CHECK_THROWS_AS(lemma_margins(t), Error);
}

TEST_CASE("unvisited cells give lemma margins ln d / eta and 0") {
    Trajectory t(EngineKind::fairness_aware, {"a", "b", "c"}, 0.2);
    const auto margins = lemma_margins(t);
    for (const auto& m : margins) {
        if (m.bound == BoundKind::lemma1) CHECK(m.value == doctest::Approx(std::log(3.0) / 0.2));
        if (m.bound == BoundKind::lemma2) CHECK(m.value == 0.0);
    }
    CHECK(margins.size() == 4 * 3 + 4);
    CHECK_THROWS_AS(theorem1_margins(t), Error);
}

TEST_CASE("bounds hold on engine runs") {
    Gen gen(41);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t d = gen.integer(2, 6);
        const auto ensemble = biased_experts(d);
        const auto stream = gen.stream(gen.integer(200, 3000), 0.8, 0.3, 0.15);
        RunConfig cfg;
        cfg.seed = seed;
        cfg.eta = gen.uniform(0.01, 0.49);
        for (EngineKind e : {EngineKind::mw, EngineKind::group_aware, EngineKind::fairness_aware}) {
            cfg.engine = e;
            const auto report = validate_bounds(run_trial(cfg, stream, ensemble, seed));
            CHECK_FALSE(report.first_violation(kBoundTolerance).has_value());
            CHECK(!report.margins.empty());
        }
    }
}

TEST_CASE("inflated expected loss is reported as a violation") {
    Gen gen(42);
    const auto stream = gen.stream(500, 0.5, 0.5, 0.5);
    RunConfig cfg;
    cfg.eta = 0.1;
    const auto t = run_trial(cfg, stream, biased_experts(3));
    Trajectory corrupted(t.engine(), t.expert_names(), t.eta(), t.dirichlet_alpha());
    for (auto o : t.outcomes()) {
        o.expected_loss = 1.0;
        corrupted.append(o);
    }
    const auto v = validate_bounds(corrupted).first_violation(kBoundTolerance);
    REQUIRE(v.has_value());
    CHECK(v->bound == BoundKind::theorem1);
    CHECK(v->expert.has_value());
}

TEST_CASE("compute_rates on a trajectory equals a brute-force recount") {
    Gen gen(43);
    RunConfig cfg;
    cfg.engine = EngineKind::fairness_aware;
    const auto stream = gen.stream(2000, 0.7, 0.4, 0.2);
    const auto t = run_trial(cfg, stream, biased_experts(3));
    std::size_t fp[2]{}, tn[2]{}, fn[2]{}, tp[2]{};
    for (const auto& o : t.outcomes()) {
        const auto g = static_cast<std::size_t>(o.group);
        if (o.label == Label::negative) {
            (o.prediction == Label::positive ? fp[g] : tn[g])++;
        } else {
            (o.prediction == Label::negative ? fn[g] : tp[g])++;
        }
    }
    const auto r = compute_rates(t);
    const auto rate = [](std::size_t a, std::size_t b) { return static_cast<double>(a) / static_cast<double>(a + b); };
    CHECK(*r.fpr_a == rate(fp[0], tn[0]));
    CHECK(*r.fpr_b == rate(fp[1], tn[1]));
    CHECK(*r.fnr_a == rate(fn[0], tp[0]));
    CHECK(*r.fnr_b == rate(fn[1], tp[1]));
    CHECK(*r.fpr_gap == std::abs(rate(fp[0], tn[0]) - rate(fp[1], tn[1])));
}

TEST_CASE("fairness bound right-hand sides are reported for fairness-aware runs") {
    Gen gen(44);
    RunConfig cfg;
    cfg.engine = EngineKind::fairness_aware;
    cfg.eta = 0.1;
    const auto stream = gen.stream(3000, 0.8, 0.3, 0.2);
    const auto t = run_trial(cfg, stream, biased_experts(2));
    const auto report = validate_bounds(t, BoundOptions{0.02});
    CHECK(report.epsilon == 0.02);
    REQUIRE(report.fpr_bound_rhs.has_value());
    REQUIRE(report.fnr_bound_rhs.has_value());
    CHECK(*report.fpr_bound_rhs >= 0.0);
    CHECK(report.gamma_eta == doctest::Approx(fairmw::gamma(0.1)));
    const auto measured = measured_epsilon(t);
    REQUIRE(measured.has_value());
    CHECK(*measured >= 0.0);
}
