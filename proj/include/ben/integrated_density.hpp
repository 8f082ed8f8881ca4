#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "ben/convex_core.hpp"
#include "ben/discretization.hpp"

namespace ben::energy {

/// Psi(u) = sum_e h^d psi((G u)_e) on nodal vectors, with the k-vector of
/// component differences on each edge as the density argument.
class IntegratedDensity {
public:
    IntegratedDensity(const convex::PowerDensity& density, const disc::SpaceGrid& grid,
                      int components);

    const convex::PowerDensity& density() const noexcept { return density_; }
    const disc::SpaceGrid& grid() const noexcept { return grid_; }
    int components() const noexcept { return k_; }
    Eigen::Index size() const noexcept { return gradient_.cols(); }
    const Eigen::SparseMatrix<double>& gradient_matrix() const noexcept { return gradient_; }

    double value(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    /// DPsi(u) as a dual (nodal) vector: h^d G^T Dpsi(G u).
    Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    /// h^d G^T D^2psi(G u) G.
    Eigen::SparseMatrix<double> hessian(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    /// Psi(x) - Psi(z) - <DPsi(z), x - z>, summed edgewise.
    double bregman(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& z) const;
    /// Discrete W^{1,q}_0 norm.
    double x_norm(const Eigen::Ref<const Eigen::VectorXd>& u) const;

    struct Conjugate {
        double value = 0.0;
        Eigen::VectorXd argmax;  ///< DPsi*(y), the solution of DPsi(z) = y
        int newton_iters = 0;
        double residual = 0.0;
    };

    /// Psi*(y) on the discrete dual space by Newton on DPsi(z) = y. The
    /// warm start, when given, must be finite. Throws NumericalFailure.
    Conjugate conjugate(const Eigen::Ref<const Eigen::VectorXd>& y,
                        const Eigen::VectorXd* warm_start = nullptr) const;

private:
    Eigen::VectorXd edge_vector(const Eigen::VectorXd& g, Eigen::Index e) const;

    convex::PowerDensity density_;
    disc::SpaceGrid grid_;
    int k_;
    Eigen::Index edges_;
    Eigen::SparseMatrix<double> gradient_;
    Eigen::SparseMatrix<double> gradient_t_;
    /// Factorization of the constant Hessian when q = 2.
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> quadratic_solver_;
};

}  // namespace ben::energy
