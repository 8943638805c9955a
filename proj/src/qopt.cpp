#include "fairmw/qopt.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "fairmw/error.hpp"

namespace fairmw {

AlphaSums AlphaSums::from_cells(const CellValues& cells) noexcept {
    return {cells[cell_index(GroupId::A, Label::negative)], cells[cell_index(GroupId::B, Label::negative)],
            cells[cell_index(GroupId::A, Label::positive)], cells[cell_index(GroupId::B, Label::positive)]};
}

ConstraintSystem assemble_constraint_system(const AlphaSums& alpha, double p_hat, double mu_a, double mu_b,
                                            std::size_t t_elapsed, const std::array<double, 3>& b_tolerance,
                                            const std::array<double, 3>& lambda) {
    const auto finite = [](double x) { return std::isfinite(x); };
    const std::array<double, 10> inputs{alpha.a_neg, alpha.b_neg, alpha.a_pos, alpha.b_pos, p_hat,
                                        mu_a,        mu_b,        b_tolerance[0], b_tolerance[1], b_tolerance[2]};
    if (!std::all_of(inputs.begin(), inputs.end(), finite) || !std::all_of(lambda.begin(), lambda.end(), finite)) {
        throw Error(ErrorKind::NonFiniteInput, "constraint system inputs must be finite");
    }
    const auto open_unit = [](double x) { return x > 0.0 && x < 1.0; };
    if (!open_unit(p_hat) || !open_unit(mu_a) || !open_unit(mu_b)) {
        throw Error(ErrorKind::InvalidArgument, "p and mu estimates must lie in (0, 1)");
    }
    if (t_elapsed == 0) throw Error(ErrorKind::InvalidArgument, "t_elapsed must be at least 1");

    const double t = static_cast<double>(t_elapsed);
    ConstraintSystem sys;
    sys.matrix[0] = {alpha.a_neg / (p_hat * (1.0 - mu_a) * t), -alpha.b_neg / ((1.0 - p_hat) * (1.0 - mu_b) * t), 0.0,
                     0.0};
    sys.matrix[1] = {0.0, 0.0, -alpha.a_pos / (p_hat * mu_a * t), alpha.b_pos / ((1.0 - p_hat) * mu_b * t)};
    sys.matrix[2] = {alpha.a_neg, alpha.b_neg, alpha.a_pos, alpha.b_pos};
    sys.rhs = b_tolerance;
    sys.lambda = lambda;
    return sys;
}

double proximal_weight(const std::array<double, 3>& lambda) noexcept {
    double top = 0.0;
    for (double l : lambda) top = std::max(top, l * l);
    return kProximalBase * (top > 0.0 ? top : 1.0);
}

double q_objective(const ConstraintSystem& system, double a_neg, double b_neg) {
    const std::array<double, 4> q{a_neg, b_neg, 1.0 - a_neg, 1.0 - b_neg};
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        double r = -system.rhs[i];
        for (std::size_t j = 0; j < 4; ++j) r += system.matrix[i][j] * q[j];
        r *= system.lambda[i];
        total += r * r;
    }
    double prox = 0.0;
    for (double x : q) prox += (x - 0.5) * (x - 0.5);
    return total + proximal_weight(system.lambda) * prox;
}

namespace {

// In the reduced variables x = (a_neg, b_neg) the weighted residual is
// M x + c, and the proximal term is 2 rho ||x - 1/2||^2.
struct Reduced {
    Eigen::Matrix<double, 3, 2> m;
    Eigen::Vector3d c;
    double rho;
};

Reduced reduce(const ConstraintSystem& s) {
    Reduced r;
    for (int i = 0; i < 3; ++i) {
        const auto& row = s.matrix[static_cast<std::size_t>(i)];
        const double l = s.lambda[static_cast<std::size_t>(i)];
        r.m(i, 0) = l * (row[0] - row[2]);
        r.m(i, 1) = l * (row[1] - row[3]);
        r.c(i) = l * (row[2] + row[3] - s.rhs[static_cast<std::size_t>(i)]);
    }
    r.rho = proximal_weight(s.lambda);
    return r;
}

// Minimizer over the full plane, solved as the stacked least-squares problem
// [M; sqrt(2 rho) I] d = -[r0; 0] around x0 = (1/2, 1/2).
Eigen::Vector2d unconstrained_minimizer(const Reduced& r) {
    const Eigen::Vector2d x0(0.5, 0.5);
    Eigen::Matrix<double, 5, 2> stacked;
    stacked.topRows<3>() = r.m;
    stacked.bottomRows<2>() = std::sqrt(2.0 * r.rho) * Eigen::Matrix2d::Identity();
    Eigen::Matrix<double, 5, 1> target;
    target.head<3>() = -(r.m * x0 + r.c);
    target.tail<2>().setZero();
    const Eigen::JacobiSVD<Eigen::Matrix<double, 5, 2>> svd(stacked, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return x0 + svd.solve(target);
}

// Minimizer along the edge where coordinate `fixed` is held at `value`.
Eigen::Vector2d edge_minimizer(const Reduced& r, int fixed, double value) {
    const int free = 1 - fixed;
    double num = r.rho;  // 2 rho * 1/2
    double den = 2.0 * r.rho;
    for (int i = 0; i < 3; ++i) {
        const double offset = r.m(i, fixed) * value + r.c(i);
        num -= r.m(i, free) * offset;
        den += r.m(i, free) * r.m(i, free);
    }
    Eigen::Vector2d x;
    x(fixed) = value;
    x(free) = std::clamp(num / den, 0.0, 1.0);
    return x;
}

}  // namespace

QDistribution solve_q(const ConstraintSystem& system) {
    const Reduced r = reduce(system);
    const Eigen::Vector2d interior = unconstrained_minimizer(r);
    if (interior.allFinite() && interior.minCoeff() >= 0.0 && interior.maxCoeff() <= 1.0) {
        return QDistribution::from_negatives(interior(0), interior(1));
    }
    Eigen::Vector2d best = edge_minimizer(r, 0, 0.0);
    double best_value = q_objective(system, best(0), best(1));
    for (const auto& [fixed, value] : {std::pair{0, 1.0}, std::pair{1, 0.0}, std::pair{1, 1.0}}) {
        const Eigen::Vector2d x = edge_minimizer(r, fixed, value);
        const double v = q_objective(system, x(0), x(1));
        if (v < best_value) {
            best = x;
            best_value = v;
        }
    }
    return QDistribution::from_negatives(best(0), best(1));
}

}  // namespace fairmw
