#include "ben/integrated_density.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ben/errors.hpp"

namespace ben::energy {
namespace {

constexpr double kConjugateTol = 1e-12;
constexpr double kConjugateAcceptTol = 1e-8;
constexpr int kConjugateMaxIters = 60;
constexpr int kConjugateMaxHalvings = 30;

}  // namespace

IntegratedDensity::IntegratedDensity(const convex::PowerDensity& density,
                                     const disc::SpaceGrid& grid, int components)
    : density_(density), grid_(grid), k_(components),
      edges_(static_cast<Eigen::Index>(grid.edge_count())),
      gradient_(disc::gradient_matrix(grid, components)),
      gradient_t_(gradient_.transpose()) {
    if (density_.exponent() == 2.0) {
        const double c = grid_.cell_volume() * (density_.coefficient() + density_.regularizer());
        const Eigen::SparseMatrix<double> stiffness = c * (gradient_t_ * gradient_);
        quadratic_solver_.compute(stiffness);
        if (quadratic_solver_.info() != Eigen::Success) {
            throw NumericalFailure("stiffness factorization failed", 0.0);
        }
    }
}

Eigen::VectorXd IntegratedDensity::edge_vector(const Eigen::VectorXd& g, Eigen::Index e) const {
    Eigen::VectorXd v(k_);
    for (int c = 0; c < k_; ++c) v[c] = g[c * edges_ + e];
    return v;
}

double IntegratedDensity::value(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    const Eigen::VectorXd g = gradient_ * u;
    double sum = 0.0;
    if (k_ == 1) {
        for (Eigen::Index e = 0; e < edges_; ++e) sum += density_.profile(std::abs(g[e]));
    } else {
        for (Eigen::Index e = 0; e < edges_; ++e) sum += density_.profile(edge_vector(g, e).norm());
    }
    return grid_.cell_volume() * sum;
}

Eigen::VectorXd IntegratedDensity::gradient(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    Eigen::VectorXd g = gradient_ * u;
    const double a = density_.coefficient();
    const double q = density_.exponent();
    const double eps = density_.regularizer();
    if (q == 2.0) {
        g *= a + eps;
    } else {
        for (Eigen::Index e = 0; e < edges_; ++e) {
            double r2 = 0.0;
            for (int c = 0; c < k_; ++c) r2 += g[c * edges_ + e] * g[c * edges_ + e];
            const double scale = (r2 > 0.0 ? a * std::pow(r2, 0.5 * (q - 2.0)) : 0.0) + eps;
            for (int c = 0; c < k_; ++c) g[c * edges_ + e] *= scale;
        }
    }
    return grid_.cell_volume() * (gradient_t_ * g);
}

Eigen::SparseMatrix<double> IntegratedDensity::hessian(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    const Eigen::VectorXd g = gradient_ * u;
    const Eigen::Index rows = k_ * edges_;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(rows * k_));
    for (Eigen::Index e = 0; e < edges_; ++e) {
        const Eigen::MatrixXd block = convex::hess_psi(density_, edge_vector(g, e));
        for (int r = 0; r < k_; ++r) {
            for (int c = 0; c < k_; ++c) {
                triplets.emplace_back(r * edges_ + e, c * edges_ + e, block(r, c));
            }
        }
    }
    Eigen::SparseMatrix<double> weights(rows, rows);
    weights.setFromTriplets(triplets.begin(), triplets.end());
    return grid_.cell_volume() * (gradient_t_ * weights * gradient_);
}

double IntegratedDensity::bregman(const Eigen::Ref<const Eigen::VectorXd>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& z) const {
    if (density_.exponent() == 2.0) {
        const Eigen::VectorXd d = gradient_ * (x - z);
        return 0.5 * grid_.cell_volume() * (density_.coefficient() + density_.regularizer()) *
               d.squaredNorm();
    }
    const Eigen::VectorXd gx = gradient_ * x;
    const Eigen::VectorXd gz = gradient_ * z;
    double sum = 0.0;
    for (Eigen::Index e = 0; e < edges_; ++e) {
        sum += convex::bregman(density_, edge_vector(gx, e), edge_vector(gz, e));
    }
    return grid_.cell_volume() * sum;
}

double IntegratedDensity::x_norm(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    const Eigen::VectorXd g = gradient_ * u;
    return disc::edge_lq_norm(grid_, k_, g, density_.exponent());
}

IntegratedDensity::Conjugate IntegratedDensity::conjugate(
    const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd* warm_start) const {
    if (!y.allFinite()) throw InvalidInput("conjugate argument is not finite");
    Conjugate out;
    const double y_norm = y.norm();
    if (y_norm == 0.0) {
        out.argmax = Eigen::VectorXd::Zero(y.size());
        return out;
    }

    if (density_.exponent() == 2.0) {
        out.argmax = quadratic_solver_.solve(y);
        out.newton_iters = 1;
        out.value = 0.5 * out.argmax.dot(y);
        return out;
    }

    // Minimize phi(z) = Psi(z) - <z, y>; its gradient is DPsi(z) - y.
    Eigen::VectorXd z = warm_start ? *warm_start : Eigen::VectorXd::Zero(y.size());
    auto phi = [&](const Eigen::VectorXd& v) { return value(v) - v.dot(y); };
    Eigen::VectorXd residual = gradient(z) - y;
    double res_norm = residual.norm();
    double f = phi(z);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

    for (int it = 0; it < kConjugateMaxIters && res_norm > kConjugateTol * y_norm; ++it) {
        out.newton_iters = it + 1;
        Eigen::SparseMatrix<double> hess = hessian(z);
        // Floor the diagonal so flat edges (grad = 0, eps = 0) stay solvable.
        const double floor = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
        for (Eigen::Index i = 0; i < hess.rows(); ++i) hess.coeffRef(i, i) += floor;
        solver.compute(hess);
        if (solver.info() != Eigen::Success) throw NumericalFailure("conjugate Hessian factorization", res_norm);
        const Eigen::VectorXd step = solver.solve(-residual);

        const double before = res_norm;
        double t = 1.0;
        bool accepted = false;
        for (int trial = 0; trial < kConjugateMaxHalvings; ++trial) {
            const Eigen::VectorXd trial_z = z + t * step;
            const Eigen::VectorXd trial_res = gradient(trial_z) - y;
            const double trial_f = phi(trial_z);
            const double trial_norm = trial_res.norm();
            // Armijo on phi, or plain residual contraction once phi is below
            // its rounding floor.
            if (trial_f <= f + 1e-4 * t * residual.dot(step) || trial_norm <= 0.5 * res_norm) {
                z = trial_z;
                residual = trial_res;
                res_norm = trial_norm;
                f = trial_f;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        // Stalled at the rounding floor: stop once the residual no longer
        // contracts and is already acceptable.
        if (res_norm > 0.5 * before && res_norm <= kConjugateAcceptTol * y_norm) break;
    }

    out.residual = res_norm;
    if (res_norm > kConjugateAcceptTol * y_norm) {
        throw NumericalFailure("discrete conjugate Newton did not converge", res_norm);
    }
    out.argmax = std::move(z);
    out.value = std::max(0.0, out.argmax.dot(y) - value(out.argmax));
    return out;
}

}  // namespace ben::energy
