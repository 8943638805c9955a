#include <doctest.h>

#include <cmath>

#include "fairmw/error.hpp"
#include "fairmw/estimators.hpp"
#include "support.hpp"

using namespace fairmw;

TEST_CASE("frequentist_rate") {
    const auto r = frequentist_rate({1, 3, 2, 4}, 10);
    CHECK(r[cell_index(GroupId::A, Label::positive)] == doctest::Approx(0.3));
    const auto one = frequentist_rate({0, 0, 5, 0}, 5);
    CHECK(one == CellValues{0.0, 0.0, 1.0, 0.0});
    try {
        frequentist_rate({0, 0, 0, 0}, 0);
        FAIL("expected NoObservations");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoObservations);
    }
    CHECK_THROWS_AS(frequentist_rate({1, 1, 1, 1}, 5), Error);
}

TEST_CASE("dirichlet_rate") {
    CHECK(dirichlet_rate({0, 0, 0, 0}, 0, 1.0) == CellValues{0.25, 0.25, 0.25, 0.25});
    // c_{A,+} = 9998, the remaining 2 rounds elsewhere: (9998 + 1) / (10000 + 4).
    const auto r = dirichlet_rate({1, 9998, 0, 1}, 10000, 1.0);
    CHECK(std::abs(r[cell_index(GroupId::A, Label::positive)] - 0.999500) <= 1e-5);
    CHECK(r[cell_index(GroupId::A, Label::positive)] == 9999.0 / 10004.0);
    CHECK_THROWS_AS(dirichlet_rate({0, 0, 0, 0}, 0, 0.0), Error);
}

TEST_CASE("group-conditional mu estimate") {
    RateEstimates est(1.0);
    for (int i = 0; i < 3; ++i) est.observe(GroupId::A, Label::positive);
    est.observe(GroupId::A, Label::negative);
    CHECK(est.mu_hat(GroupId::A) == doctest::Approx(2.0 / 3.0));
    CHECK(est.mu_hat(GroupId::B) == 0.5);
    CHECK(est.p_hat() == doctest::Approx(6.0 / 8.0));
    CHECK(est.rounds() == 4);
    CHECK(est.rounds(GroupId::A) == 4);
}

TEST_CASE("vanishing prior matches the frequentist rate") {
    testing_support::Gen gen(8);
    for (int i = 0; i < 100; ++i) {
        CellCounts c{gen.integer(0, 50), gen.integer(0, 50), gen.integer(0, 50), gen.integer(0, 50)};
        const std::size_t t = c[0] + c[1] + c[2] + c[3];
        if (t == 0) continue;
        const auto a = dirichlet_rate(c, t, 1e-12);
        const auto b = frequentist_rate(c, t);
        for (std::size_t k = 0; k < kCells; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-9);
    }
}

TEST_CASE("Dirichlet estimates converge") {
    const CellValues truth{0.55, 0.2, 0.15, 0.1};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        RateEstimates est(1.0);
        for (int i = 0; i < 10000; ++i) {
            const std::size_t c = sample_index(truth, rng.uniform());
            est.observe(cell_group(c), cell_label(c));
        }
        const auto r = est.cell_rates();
        double sup = 0.0;
        for (std::size_t k = 0; k < kCells; ++k) sup = std::max(sup, std::abs(r[k] - truth[k]));
        CHECK(sup <= 0.02);
    }
}

TEST_CASE("alpha_step examples") {
    SUBCASE("identical slices give zero") {
        WeightTable w(TableKind::full, 3);
        const auto step = alpha_step(w, std::vector<double>{1.0, 0.0, 1.0}, GroupId::B, Label::positive);
        CHECK(step.alpha == CellValues{0.0, 0.0, 0.0, 0.0});
    }
    SUBCASE("d=2, (z,+) slice (1,3), (z,-) slice (3,1), losses (1,0)") {
        WeightTable w(TableKind::full, 2);
        // Two half-steps of ln 3 / ln 2 at eta = 1/2 scale an entry by 1/3.
        const double half = std::log(3.0) / std::log(2.0) / 2.0;
        for (int i = 0; i < 2; ++i) {
            w.update_slice(WeightTable::slice_of(GroupId::A, Label::positive), 0.5, std::vector<double>{half, 0.0});
            w.update_slice(WeightTable::slice_of(GroupId::A, Label::negative), 0.5, std::vector<double>{0.0, half});
        }
        const auto step = alpha_step(w, std::vector<double>{1.0, 0.0}, GroupId::A, Label::positive);
        CHECK(step.alpha[cell_index(GroupId::A, Label::negative)] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(step.alpha[cell_index(GroupId::A, Label::positive)] == 0.0);
        CHECK(step.alpha[cell_index(GroupId::B, Label::negative)] == 0.0);
    }
    SUBCASE("all experts correct gives zero") {
        WeightTable w(TableKind::full, 2);
        w.update_slice(0, 0.3, std::vector<double>{1.0, 0.0});
        const auto step = alpha_step(w, std::vector<double>{0.0, 0.0}, GroupId::A, Label::positive);
        CHECK(step.alpha == CellValues{0.0, 0.0, 0.0, 0.0});
    }
    CHECK_THROWS_AS(alpha_step(WeightTable(TableKind::grouped, 2), std::vector<double>{0.0, 1.0}, GroupId::A,
                               Label::negative),
                    Error);
}

TEST_CASE("alpha contributions: bounded, confined to one cell, sums replay exactly") {
    testing_support::Gen gen(21);
    const std::size_t d = 4;
    WeightTable w(TableKind::full, d);
    AlphaTracker tracker;
    CellValues replay{};
    for (int round = 0; round < 2000; ++round) {
        const GroupId g = gen.group(0.7);
        const Label y = gen.label(0.3);
        std::vector<double> losses(d);
        for (auto& l : losses) l = gen.coin(0.4) ? 1.0 : 0.0;
        const auto step = alpha_step(w, losses, g, y);
        tracker.record(step);
        for (std::size_t c = 0; c < kCells; ++c) {
            CHECK(step.alpha[c] >= -1.0);
            CHECK(step.alpha[c] <= 1.0);
            if (c != cell_index(g, flip(y))) CHECK(step.alpha[c] == 0.0);
        }
        // Independent evaluation from the two normalized slices.
        const auto right = w.distribution(WeightTable::slice_of(g, y));
        const auto wrong = w.distribution(WeightTable::slice_of(g, flip(y)));
        double e_right = 0.0;
        double e_wrong = 0.0;
        for (std::size_t f = 0; f < d; ++f) {
            e_right += right[f] * losses[f];
            e_wrong += wrong[f] * losses[f];
        }
        replay[cell_index(g, flip(y))] += e_wrong - e_right;
        w.update_slice(WeightTable::slice_of(g, y), 0.2, losses);
    }
    CHECK(tracker.sums() == replay);
}
