#include <cmath>

#include <Eigen/SparseLU>

#include "ben/integrated_density.hpp"
#include "ben/solver.hpp"

namespace ben::solver {

namespace {

constexpr double kStepTol = 1e-12;
constexpr int kMaxNewton = 50;
constexpr int kMaxHalvings = 30;

}  // namespace

disc::Trajectory implicit_baseline(const models::ModelSpec& model, const disc::Field& w0,
                                   double t_end, int intervals) {
    model.validate();
    if (w0.components() != model.components) throw InvalidInput("initial datum has wrong component count");
    disc::Trajectory traj(w0, 0.0, t_end, intervals);
    const disc::SpaceGrid& grid = w0.grid();
    const int k = model.components;
    const energy::IntegratedDensity psi(model.density, grid, k);
    const double tau = traj.step();
    const double vol = grid.cell_volume();
    const double lambda = model.lambda;
    const double mass = vol / tau;
    const auto dofs = static_cast<Eigen::Index>(traj.dofs_per_state());

    Eigen::SparseMatrix<double> identity(dofs, dofs);
    identity.setIdentity();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;

    for (int step = 0; step < intervals; ++step) {
        const Eigen::VectorXd prev = traj.column(step);
        const double t = traj.times()[static_cast<std::size_t>(step + 1)];
        auto residual = [&](const Eigen::VectorXd& u) {
            Eigen::VectorXd r = mass * (u - prev);
            if (model.has_lambda()) r += models::apply_lambda(model, disc::Field(grid, k, u), t).values();
            if (lambda != 0.0) r += lambda * psi.gradient(lambda * u);
            return r;
        };

        Eigen::VectorXd u = prev;
        Eigen::VectorXd r = residual(u);
        double r_norm = r.norm();
        const double tol = kStepTol * (1.0 + mass * prev.norm());
        for (int it = 0; it < kMaxNewton && r_norm > tol; ++it) {
            Eigen::SparseMatrix<double> jac = mass * identity;
            if (model.has_lambda()) jac += models::lambda_jacobian(model, disc::Field(grid, k, u), t);
            if (lambda != 0.0) jac += lambda * lambda * psi.hessian(lambda * u);
            lu.compute(jac);
            if (lu.info() != Eigen::Success) throw StepFailure(step + 1, r_norm);
            const Eigen::VectorXd delta = lu.solve(-r);

            double damping = 1.0;
            bool decreased = false;
            for (int h = 0; h <= kMaxHalvings; ++h, damping *= 0.5) {
                const Eigen::VectorXd trial = u + damping * delta;
                Eigen::VectorXd trial_r = residual(trial);
                const double trial_norm = trial_r.norm();
                if (std::isfinite(trial_norm) && trial_norm < r_norm) {
                    u = trial;
                    r = std::move(trial_r);
                    r_norm = trial_norm;
                    decreased = true;
                    break;
                }
            }
            if (!decreased) break;
        }
        if (!(r_norm <= tol)) throw StepFailure(step + 1, r_norm);
        traj.set_state(step + 1, u);
    }
    return traj;
}

}  // namespace ben::solver
