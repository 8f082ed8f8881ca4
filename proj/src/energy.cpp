#include "ben/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ben/errors.hpp"
#include "ben/parallel.hpp"

namespace ben::energy {

using disc::Field;
using disc::Trajectory;

struct EnergyFunctional::Slice {
    Eigen::VectorXd mid;
    Eigen::VectorXd residual;
    Eigen::VectorXd conj_arg;  // DPsi*(H)
    double psi = 0.0;
    double conj = 0.0;
    double pair = 0.0;
    double gap = 0.0;
    double defect_q = 0.0;
    double residual_qs = 0.0;
    double scale_q = 0.0;
};

EnergyFunctional::EnergyFunctional(models::ModelSpec model, const disc::SpaceGrid& grid)
    : model_(std::move(model)), psi_(model_.density, grid, model_.components) {
    model_.validate();
}

void EnergyFunctional::check(const Trajectory& traj) const {
    if (!(traj.grid() == psi_.grid())) throw InvalidInput("trajectory grid does not match energy grid");
    if (traj.components() != model_.components) {
        throw InvalidInput("trajectory component count does not match model");
    }
    if (!traj.initial_locked()) throw InvalidInput("trajectory initial datum is not locked");
}

Field EnergyFunctional::residual(const Trajectory& traj, int k) const {
    if (k < 0 || k >= traj.intervals()) throw InvalidInput("interval index out of range");
    const double tau = traj.step();
    const double vol = traj.grid().cell_volume();
    const Eigen::VectorXd mid = 0.5 * (traj.column(k) + traj.column(k + 1));
    const Field lam = models::apply_lambda(model_, Field(traj.grid(), traj.components(), mid),
                                           traj.midpoint_time(k));
    Eigen::VectorXd h = -vol / tau * (traj.column(k + 1) - traj.column(k)) - lam.values();
    return Field(traj.grid(), traj.components(), std::move(h));
}

EnergyFunctional::Slice EnergyFunctional::slice(const Trajectory& traj, int k, bool diagnostics) const {
    Slice s;
    const double lambda = model_.lambda;
    const double q = model_.density.exponent();
    s.mid = 0.5 * (traj.column(k) + traj.column(k + 1));
    s.residual = residual(traj, k).values();
    const Eigen::VectorXd scaled = lambda * s.mid;

    IntegratedDensity::Conjugate conj;
    try {
        conj = psi_.conjugate(s.residual, lambda != 0.0 ? &scaled : nullptr);
    } catch (const NumericalFailure& e) {
        throw NumericalFailure("slice " + std::to_string(k) + ": " + e.what(), e.residual());
    }
    s.conj_arg = std::move(conj.argmax);
    s.conj = conj.value;
    s.psi = psi_.value(scaled);
    s.pair = -lambda * s.mid.dot(s.residual);
    // Psi(lambda m) + Psi*(H) - lambda <m, H> as a Bregman distance, which
    // stays accurate when the three terms nearly cancel.
    s.gap = psi_.bregman(scaled, s.conj_arg);
    if (diagnostics) {
        s.defect_q = std::pow(psi_.x_norm(scaled - s.conj_arg), q);
        const Field h(traj.grid(), traj.components(), s.residual);
        s.residual_qs = std::pow(models::dual_norm(h, q), q / (q - 1.0));
        s.scale_q = std::pow(psi_.x_norm(s.mid), q);
    }
    return s;
}

namespace {

EnergyReport assemble(const std::vector<double>& psi, const std::vector<double>& conj,
                      const std::vector<double>& pair, const std::vector<double>& gap,
                      const std::vector<double>& defect_q, const std::vector<double>& residual_qs,
                      const std::vector<double>& scale_q, double tau, double q) {
    EnergyReport r;
    double defect = 0.0;
    double res = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        r.term_psi += tau * psi[k];
        r.term_conj += tau * conj[k];
        r.term_pair += tau * pair[k];
        r.total += tau * gap[k];
        defect += tau * defect_q[k];
        res += tau * residual_qs[k];
        scale += tau * scale_q[k];
    }
    r.defect_norm = std::pow(defect, 1.0 / q);
    r.residual_norm = std::pow(res, (q - 1.0) / q);
    r.scale = std::pow(scale, 1.0 / q);
    r.normalized = r.total / (r.term_psi + r.term_conj + std::abs(r.term_pair) + kNormalizationFloor);
    return r;
}

}  // namespace

EnergyReport EnergyFunctional::evaluate(const Trajectory& traj) const {
    check(traj);
    const auto m = static_cast<std::size_t>(traj.intervals());
    std::vector<double> psi(m), conj(m), pair(m), gap(m), defect(m), res(m), scale(m);
    parallel_for(m, [&](std::size_t k) {
        const Slice s = slice(traj, static_cast<int>(k), true);
        psi[k] = s.psi;
        conj[k] = s.conj;
        pair[k] = s.pair;
        gap[k] = s.gap;
        defect[k] = s.defect_q;
        res[k] = s.residual_qs;
        scale[k] = s.scale_q;
    });
    return assemble(psi, conj, pair, gap, defect, res, scale, traj.step(), model_.density.exponent());
}

double EnergyFunctional::total(const Trajectory& traj) const {
    check(traj);
    const auto m = static_cast<std::size_t>(traj.intervals());
    std::vector<double> gap(m);
    parallel_for(m, [&](std::size_t k) { gap[k] = slice(traj, static_cast<int>(k), false).gap; });
    double sum = 0.0;
    for (double g : gap) sum += traj.step() * g;
    return sum;
}

EnergyReport EnergyFunctional::evaluate_with_gradient(const Trajectory& traj,
                                                      Eigen::MatrixXd& grad) const {
    check(traj);
    const auto m = static_cast<std::size_t>(traj.intervals());
    const auto dofs = static_cast<Eigen::Index>(traj.dofs_per_state());
    const double tau = traj.step();
    const double vol = traj.grid().cell_volume();
    const double lambda = model_.lambda;
    std::vector<double> psi(m), conj(m), pair(m), gap(m), defect(m), res(m), scale(m);
    // Per-slice contributions: shared part (to both endpoints) and the
    // time-derivative part (+ to u_{k+1}, - to u_k).
    Eigen::MatrixXd shared(dofs, static_cast<Eigen::Index>(m));
    Eigen::MatrixXd jump(dofs, static_cast<Eigen::Index>(m));

    parallel_for(m, [&](std::size_t k) {
        const int ki = static_cast<int>(k);
        const Slice s = slice(traj, ki, true);
        psi[k] = s.psi;
        conj[k] = s.conj;
        pair[k] = s.pair;
        gap[k] = s.gap;
        defect[k] = s.defect_q;
        res[k] = s.residual_qs;
        scale[k] = s.scale_q;

        const Eigen::VectorXd scaled = lambda * s.mid;
        const Eigen::VectorXd defect_vec = scaled - s.conj_arg;
        Eigen::VectorXd part = Eigen::VectorXd::Zero(dofs);
        if (lambda != 0.0) part += lambda * (psi_.gradient(scaled) - s.residual);
        if (model_.has_lambda()) {
            const Field mid(traj.grid(), traj.components(), s.mid);
            const Eigen::SparseMatrix<double> jac =
                models::lambda_jacobian(model_, mid, traj.midpoint_time(ki));
            part += jac.transpose() * defect_vec;
        }
        shared.col(static_cast<Eigen::Index>(k)) = 0.5 * tau * part;
        jump.col(static_cast<Eigen::Index>(k)) = vol * defect_vec;
    });

    grad = Eigen::MatrixXd::Zero(dofs, static_cast<Eigen::Index>(m + 1));
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(m); ++k) {
        grad.col(k + 1) += shared.col(k) + jump.col(k);
        grad.col(k) += shared.col(k) - jump.col(k);
    }
    grad.col(0).setZero();
    return assemble(psi, conj, pair, gap, defect, res, scale, tau, model_.density.exponent());
}

double EnergyFunctional::gradient_norm(const Trajectory& traj, const Eigen::MatrixXd& grad) {
    const double w = traj.step() * traj.grid().cell_volume();
    return std::sqrt(grad.rightCols(grad.cols() - 1).squaredNorm() / w);
}

Field residual(const models::ModelSpec& model, const Trajectory& traj, int k) {
    return EnergyFunctional(model, traj.grid()).residual(traj, k);
}

EnergyReport eval_energy(const models::ModelSpec& model, const Trajectory& traj) {
    return EnergyFunctional(model, traj.grid()).evaluate(traj);
}

Eigen::MatrixXd grad_energy(const models::ModelSpec& model, const Trajectory& traj) {
    Eigen::MatrixXd grad;
    EnergyFunctional(model, traj.grid()).evaluate_with_gradient(traj, grad);
    return grad;
}

Certificate certificate(const EnergyReport& report, double tol) {
    Certificate c;
    c.normalized = report.normalized;
    c.defect_norm = report.defect_norm;
    c.scale = report.scale;
    c.tol = tol;
    c.solved = report.normalized <= tol && report.defect_norm <= tol * report.scale;
    return c;
}

Certificate certificate(const models::ModelSpec& model, const Trajectory& traj, double tol) {
    return certificate(eval_energy(model, traj), tol);
}

GradientCheck finite_difference_check(const EnergyFunctional& functional, const Trajectory& traj,
                                      int directions, std::uint64_t seed) {
    Eigen::MatrixXd grad;
    functional.evaluate_with_gradient(traj, grad);
    const Eigen::VectorXd x = traj.free_values();
    const Eigen::MatrixXd tail = grad.rightCols(grad.cols() - 1);
    const Eigen::Map<const Eigen::VectorXd> g(tail.data(), tail.size());
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    GradientCheck out;
    Trajectory probe = traj;
    for (int i = 0; i < directions; ++i) {
        Eigen::VectorXd d(x.size());
        for (Eigen::Index j = 0; j < d.size(); ++j) d[j] = normal(rng);
        d /= d.cwiseAbs().maxCoeff();
        const double exact = g.dot(d);
        double best = std::numeric_limits<double>::infinity();
        for (double step : {1e-4, 1e-5, 1e-6, 1e-7}) {
            const double s = step * scale;
            probe.set_free_values(x + s * d);
            const double up = functional.total(probe);
            probe.set_free_values(x - s * d);
            const double down = functional.total(probe);
            const double fd = (up - down) / (2.0 * s);
            const double denom = std::max({std::abs(exact), std::abs(fd), 1e-300});
            best = std::min(best, std::abs(fd - exact) / denom);
        }
        out.worst_relative = std::max(out.worst_relative, best);
        ++out.directions;
    }
    return out;
}

}  // namespace ben::energy
