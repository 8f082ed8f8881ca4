#include "ben/convex_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ben/errors.hpp"

namespace ben::convex {
namespace {

void require_finite(const Eigen::Ref<const Eigen::VectorXd>& v, const char* name) {
    if (!v.allFinite()) {
        throw InvalidInput(std::string("non-finite component in ") + name);
    }
}

constexpr double kProfileTol = 1e-12;
constexpr int kProfileMaxIters = 200;

}  // namespace

PowerDensity::PowerDensity(double coefficient, double exponent, double regularizer)
    : a_(coefficient), q_(exponent), eps_(regularizer) {
    if (!(std::isfinite(a_) && a_ > 0.0)) throw InvalidInput("density coefficient must be > 0");
    if (!(std::isfinite(q_) && q_ >= 2.0)) throw InvalidInput("density exponent must be >= 2");
    if (!(std::isfinite(eps_) && eps_ >= 0.0)) {
        throw InvalidInput("density regularizer must be >= 0");
    }
}

double PowerDensity::profile(double r) const {
    return a_ / q_ * std::pow(r, q_) + 0.5 * eps_ * r * r;
}

double PowerDensity::profile_slope(double r) const {
    return a_ * std::pow(r, q_ - 1.0) + eps_ * r;
}

double PowerDensity::profile_curvature(double r) const {
    if (q_ == 2.0) return a_ + eps_;
    return a_ * (q_ - 1.0) * std::pow(r, q_ - 2.0) + eps_;
}

double PowerDensity::growth_constant() const {
    // r^2 <= r^q + 1 for q >= 2 bounds the quadratic part by the power part.
    return std::max(q_ / a_, a_ / q_ + 0.5 * eps_);
}

double eval_psi(const PowerDensity& density, const Eigen::Ref<const Eigen::VectorXd>& xi) {
    require_finite(xi, "xi");
    return density.profile(xi.norm());
}

Eigen::VectorXd grad_psi(const PowerDensity& density,
                         const Eigen::Ref<const Eigen::VectorXd>& xi) {
    require_finite(xi, "xi");
    const double r = xi.norm();
    if (r == 0.0) return Eigen::VectorXd::Zero(xi.size());
    const double q = density.exponent();
    const double scale =
        (q == 2.0 ? density.coefficient() : density.coefficient() * std::pow(r, q - 2.0)) +
        density.regularizer();
    return scale * xi;
}

Eigen::MatrixXd hess_psi(const PowerDensity& density,
                         const Eigen::Ref<const Eigen::VectorXd>& xi) {
    require_finite(xi, "xi");
    const auto k = xi.size();
    const double a = density.coefficient();
    const double q = density.exponent();
    const double eps = density.regularizer();
    const double r = xi.norm();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(k, k) * eps;
    if (q == 2.0) {
        h.diagonal().array() += a;
        return h;
    }
    if (r == 0.0) return h;
    const double rq2 = std::pow(r, q - 2.0);
    h.diagonal().array() += a * rq2;
    h += a * (q - 2.0) * rq2 / (r * r) * xi * xi.transpose();
    return h;
}

double invert_profile_slope(const PowerDensity& density, double s, int* iterations) {
    if (iterations) *iterations = 0;
    if (!(std::isfinite(s) && s >= 0.0)) throw InvalidInput("profile target must be finite, >= 0");
    if (s == 0.0) return 0.0;

    const double a = density.coefficient();
    const double q = density.exponent();
    const double eps = density.regularizer();
    if (q == 2.0) {
        if (iterations) *iterations = 1;
        return s / (a + eps);
    }

    // Each term alone is at most s at the root, giving two upper bounds.
    double hi = std::pow(s / a, 1.0 / (q - 1.0));
    if (eps > 0.0) hi = std::min(hi, s / eps);
    double lo = 0.0;
    double r = hi;
    const double tol = kProfileTol * std::max(1.0, s);
    double residual = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= kProfileMaxIters; ++it) {
        residual = density.profile_slope(r) - s;
        if (iterations) *iterations = it;
        if (std::abs(residual) <= tol) return r;
        if (residual > 0.0) {
            hi = r;
        } else {
            lo = r;
        }
        const double curvature = density.profile_curvature(r);
        double next = curvature > 0.0 ? r - residual / curvature : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) {
            residual = density.profile_slope(next) - s;
            if (std::abs(residual) <= tol) return next;
            break;
        }
        r = next;
    }
    throw NumericalFailure("radial conjugate Newton did not converge", residual);
}

ConjugateValue eval_conjugate(const PowerDensity& density,
                              const Eigen::Ref<const Eigen::VectorXd>& y) {
    require_finite(y, "y");
    ConjugateValue out;
    const double norm = y.norm();
    if (norm == 0.0) {
        out.argmax = Eigen::VectorXd::Zero(y.size());
        return out;
    }
    const double r = invert_profile_slope(density, norm, &out.newton_iters);
    out.argmax = (r / norm) * y;
    out.value = std::max(0.0, r * norm - density.profile(r));
    return out;
}

double fenchel_gap(const PowerDensity& density, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
    require_finite(x, "x");
    const ConjugateValue conj = eval_conjugate(density, y);
    return density.profile(x.norm()) + conj.value - x.dot(y);
}

double bregman(const PowerDensity& density, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& z) {
    const Eigen::VectorXd d = x - z;
    if (density.exponent() == 2.0) {
        return 0.5 * (density.coefficient() + density.regularizer()) * d.squaredNorm();
    }
    const double value = eval_psi(density, x) - eval_psi(density, z) - grad_psi(density, z).dot(d);
    return std::max(0.0, value);
}

}  // namespace ben::convex
