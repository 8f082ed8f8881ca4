#pragma once

#include <Eigen/Core>

namespace ben::convex {

/// Radial convex integrand psi(xi) = (a/q)|xi|^q + (eps/2)|xi|^2.
///
/// The profile r -> a r^(q-1) + eps r is strictly increasing on [0, inf),
/// so the gradient is a bijection of R^k and the conjugate is obtained by a
/// scalar root solve along the direction of y.
class PowerDensity {
public:
    PowerDensity(double coefficient, double exponent, double regularizer = 0.0);

    double coefficient() const noexcept { return a_; }
    double exponent() const noexcept { return q_; }
    double regularizer() const noexcept { return eps_; }
    /// q* = q/(q-1).
    double dual_exponent() const noexcept { return q_ / (q_ - 1.0); }

    /// psi as a function of r = |xi|.
    double profile(double r) const;
    /// d psi / dr = a r^(q-1) + eps r.
    double profile_slope(double r) const;
    /// d^2 psi / dr^2 = a (q-1) r^(q-2) + eps.
    double profile_curvature(double r) const;

    /// Growth constant C0 with (1/C0) r^q - C0 <= profile(r) <= C0 r^q + C0.
    double growth_constant() const;

private:
    double a_;
    double q_;
    double eps_;
};

struct ConjugateValue {
    double value = 0.0;
    Eigen::VectorXd argmax;
    int newton_iters = 0;
};

double eval_psi(const PowerDensity& density, const Eigen::Ref<const Eigen::VectorXd>& xi);

Eigen::VectorXd grad_psi(const PowerDensity& density,
                         const Eigen::Ref<const Eigen::VectorXd>& xi);

/// Hessian a|xi|^(q-2) (I + (q-2) xi xi^T/|xi|^2) + eps I.
Eigen::MatrixXd hess_psi(const PowerDensity& density,
                         const Eigen::Ref<const Eigen::VectorXd>& xi);

/// Solves a r^(q-1) + eps r = s for r >= 0. Safeguarded Newton with
/// bisection fallback; throws NumericalFailure when the bracket collapses
/// without meeting the tolerance.
double invert_profile_slope(const PowerDensity& density, double s, int* iterations = nullptr);

ConjugateValue eval_conjugate(const PowerDensity& density,
                              const Eigen::Ref<const Eigen::VectorXd>& y);

/// psi(x) + psi*(y) - x.y, nonnegative with equality iff y = Dpsi(x).
double fenchel_gap(const PowerDensity& density, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// psi(x) - psi(z) - <Dpsi(z), x - z>. Equals the Fenchel gap at y = Dpsi(z).
double bregman(const PowerDensity& density, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& z);

}  // namespace ben::convex
