#pragma once

// Random generators for property tests and reference implementations that
// the library results are compared against.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fairmw/domain.hpp"
#include "fairmw/qopt.hpp"
#include "fairmw/rng.hpp"

namespace testing_support {

using namespace fairmw;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }
    std::size_t integer(std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(rng_.below(hi - lo + 1)); }
    bool coin(double p = 0.5) { return rng_.uniform() < p; }
    GroupId group(double p_a = 0.5) { return coin(p_a) ? GroupId::A : GroupId::B; }
    Label label(double p_pos = 0.5) { return coin(p_pos) ? Label::positive : Label::negative; }
    Rng& rng() { return rng_; }

    std::vector<Example> stream(std::size_t n, double p, double mu_a, double mu_b) {
        std::vector<Example> out(n);
        for (auto& ex : out) {
            ex.group = group(p);
            ex.label = label(ex.group == GroupId::A ? mu_a : mu_b);
        }
        return out;
    }

    ConstraintSystem system() {
        ConstraintSystem s;
        for (auto& row : s.matrix) {
            for (auto& x : row) x = uniform(-1.0, 1.0);
        }
        for (auto& b : s.rhs) b = uniform(-1.0, 1.0);
        for (auto& l : s.lambda) l = uniform(0.0, 2.0);
        return s;
    }

private:
    Rng rng_;
};

/// Objective written out from its definition:
///   sum_i (lambda_i (A q - b)_i)^2 + 1e-8 max(lambda_i^2) ||q - 1/2||^2
inline double reference_objective(const ConstraintSystem& s, double a_neg, double b_neg) {
    const double q[4] = {a_neg, b_neg, 1.0 - a_neg, 1.0 - b_neg};
    double value = 0.0;
    double top = 0.0;
    for (int i = 0; i < 3; ++i) {
        double r = 0.0;
        for (int j = 0; j < 4; ++j) r += s.matrix[i][j] * q[j];
        r = s.lambda[i] * (r - s.rhs[i]);
        value += r * r;
        top = std::max(top, s.lambda[i] * s.lambda[i]);
    }
    const double rho = 1e-8 * (top > 0.0 ? top : 1.0);
    for (double x : q) value += rho * (x - 0.5) * (x - 0.5);
    return value;
}

struct GridResult {
    double objective = std::numeric_limits<double>::infinity();
    double a_neg = 0.0;
    double b_neg = 0.0;
};

/// Exhaustive search over the (a_neg, b_neg) grid with spacing `step`.
inline GridResult grid_oracle(const ConstraintSystem& s, double step = 1e-3) {
    GridResult best;
    const auto n = static_cast<int>(std::lround(1.0 / step));
    for (int i = 0; i <= n; ++i) {
        const double a = i * step;
        for (int j = 0; j <= n; ++j) {
            const double b = j * step;
            const double v = reference_objective(s, a, b);
            if (v < best.objective) best = {v, a, b};
        }
    }
    return best;
}

/// Plain MW weights after a sequence of 0-1 loss vectors.
inline std::vector<double> mw_replay(std::size_t d, double eta, const std::vector<std::vector<double>>& losses) {
    std::vector<double> w(d, 1.0);
    for (const auto& round : losses) {
        for (std::size_t f = 0; f < d; ++f) {
            if (round[f] == 1.0) w[f] *= 1.0 - eta;
        }
    }
    return w;
}

}  // namespace testing_support
