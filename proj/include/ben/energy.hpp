#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "ben/discretization.hpp"
#include "ben/integrated_density.hpp"
#include "ben/models.hpp"

namespace ben::energy {

/// Breakdown of J(u) over a trajectory. Norms are L^q / L^{q*} in time of
/// the slice norms; `scale` is the L^q(X) norm of the midpoint states.
struct EnergyReport {
    double total = 0.0;
    double term_psi = 0.0;
    double term_conj = 0.0;
    double term_pair = 0.0;
    double residual_norm = 0.0;
    double defect_norm = 0.0;
    double normalized = 0.0;
    double scale = 0.0;
};

inline constexpr double kNormalizationFloor = 1e-30;

/// J and its derivative for one model on one grid. Holds the factorized
/// dual-density data, so reuse it across evaluations of many trajectories.
class EnergyFunctional {
public:
    EnergyFunctional(models::ModelSpec model, const disc::SpaceGrid& grid);

    const models::ModelSpec& model() const noexcept { return model_; }
    const IntegratedDensity& density() const noexcept { return psi_; }

    /// H_k = -h^d (u_{k+1} - u_k)/tau - Lambda(u_{k+1/2}) at the slice midpoint time.
    disc::Field residual(const disc::Trajectory& traj, int k) const;

    EnergyReport evaluate(const disc::Trajectory& traj) const;
    /// Total J only (skips the norm diagnostics).
    double total(const disc::Trajectory& traj) const;
    /// Fills grad (dofs x (M+1)) with dJ/du_k; column 0 is zero.
    EnergyReport evaluate_with_gradient(const disc::Trajectory& traj, Eigen::MatrixXd& grad) const;

    /// Riesz norm of a trajectory gradient in the L^2(0,T;H) inner product.
    static double gradient_norm(const disc::Trajectory& traj, const Eigen::MatrixXd& grad);

private:
    struct Slice;
    Slice slice(const disc::Trajectory& traj, int k, bool diagnostics) const;
    void check(const disc::Trajectory& traj) const;

    models::ModelSpec model_;
    IntegratedDensity psi_;
};

disc::Field residual(const models::ModelSpec& model, const disc::Trajectory& traj, int k);
EnergyReport eval_energy(const models::ModelSpec& model, const disc::Trajectory& traj);
/// Array of dJ/du_k with the k = 0 column zero.
Eigen::MatrixXd grad_energy(const models::ModelSpec& model, const disc::Trajectory& traj);

struct GradientCheck {
    double worst_relative = 0.0;
    int directions = 0;
};

/// Compares grad . d with central differences of J along seeded random
/// directions d (u_0 held fixed), keeping the best step of 1e-4 .. 1e-7
/// relative to the trajectory scale.
GradientCheck finite_difference_check(const EnergyFunctional& functional,
                                      const disc::Trajectory& traj, int directions,
                                      std::uint64_t seed);

struct Certificate {
    bool solved = false;
    double normalized = 0.0;
    double defect_norm = 0.0;
    double scale = 0.0;
    double tol = 0.0;
};

/// Solved iff normalized <= tol and defect_norm <= tol * scale.
Certificate certificate(const EnergyReport& report, double tol);
Certificate certificate(const models::ModelSpec& model, const disc::Trajectory& traj, double tol);

}  // namespace ben::energy
