#include "ben/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace ben::solver {

using disc::Field;
using disc::Trajectory;

void SolveOptions::validate() const {
    if (max_iters < 0) throw InvalidInput("max_iters must be >= 0");
    if (!(grad_tol > 0.0)) throw InvalidInput("grad_tol must be > 0");
    if (!(energy_tol > 0.0)) throw InvalidInput("energy_tol must be > 0");
    if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) throw InvalidInput("armijo_c1 must lie in (0, 1)");
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw InvalidInput("backtrack must lie in (0, 1)");
    if (max_trials < 1) throw InvalidInput("max_trials must be >= 1");
    if (memory < 1) throw InvalidInput("memory must be >= 1");
    if (!(init_noise >= 0.0)) throw InvalidInput("init_noise must be >= 0");
}

Trajectory initial_trajectory(const Field& w0, double t_end, int intervals, const SolveOptions& opts) {
    Trajectory traj(w0, 0.0, t_end, intervals);
    if (opts.init == InitKind::random) {
        std::mt19937_64 rng(opts.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        const double amp = opts.init_noise * std::max(1.0, w0.values().cwiseAbs().maxCoeff());
        Eigen::VectorXd free = traj.free_values();
        for (Eigen::Index i = 0; i < free.size(); ++i) free[i] += amp * normal(rng);
        traj.set_free_values(free);
    }
    return traj;
}

namespace {

Eigen::VectorXd free_part(const Eigen::MatrixXd& grad) {
    const Eigen::MatrixXd tail = grad.rightCols(grad.cols() - 1);
    return Eigen::Map<const Eigen::VectorXd>(tail.data(), tail.size());
}

/// Two-loop recursion for the L-BFGS direction -H g.
Eigen::VectorXd lbfgs_direction(const Eigen::VectorXd& g, const std::deque<Eigen::VectorXd>& s,
                                const std::deque<Eigen::VectorXd>& y) {
    Eigen::VectorXd d = -g;
    const std::size_t m = s.size();
    std::vector<double> alpha(m), rho(m);
    for (std::size_t i = m; i-- > 0;) {
        rho[i] = 1.0 / y[i].dot(s[i]);
        alpha[i] = rho[i] * s[i].dot(d);
        d -= alpha[i] * y[i];
    }
    if (m > 0) d *= s.back().dot(y.back()) / y.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
        const double beta = rho[i] * y[i].dot(d);
        d += (alpha[i] - beta) * s[i];
    }
    return d;
}

}  // namespace

SolveOutcome minimize(const models::ModelSpec& model, const Trajectory& init, const SolveOptions& opts) {
    opts.validate();
    if (!init.initial_locked()) throw InvalidInput("initial trajectory must have a locked initial datum");
    const energy::EnergyFunctional functional(model, init.grid());

    SolveOutcome out{init, {}, 0, false, 0.0, {}};
    Trajectory& traj = out.trajectory;
    Eigen::MatrixXd grad;
    out.report = functional.evaluate_with_gradient(traj, grad);
    out.grad_norm = energy::EnergyFunctional::gradient_norm(traj, grad);
    out.history.push_back({out.report.total, out.grad_norm});

    Eigen::VectorXd x = traj.free_values();
    Eigen::VectorXd g = free_part(grad);
    double f = out.report.total;
    std::deque<Eigen::VectorXd> s_mem;
    std::deque<Eigen::VectorXd> y_mem;
    Trajectory trial = traj;

    for (int it = 0;; ++it) {
        if (out.grad_norm <= opts.grad_tol || out.report.normalized <= opts.energy_tol) {
            out.converged = true;
            break;
        }
        if (it >= opts.max_iters) break;

        bool steepest = !opts.use_lbfgs || s_mem.empty();
        Eigen::VectorXd d = steepest ? Eigen::VectorXd(-g) : lbfgs_direction(g, s_mem, y_mem);
        double slope = g.dot(d);
        if (!(slope < 0.0)) {
            s_mem.clear();
            y_mem.clear();
            steepest = true;
            d = -g;
            slope = -g.squaredNorm();
        }

        double step = 1.0;
        bool accepted = false;
        double f_new = f;
        Eigen::VectorXd x_new;
        while (!accepted) {
            step = 1.0;
            for (int trial_no = 0; trial_no < opts.max_trials; ++trial_no, step *= opts.backtrack) {
                x_new = x + step * d;
                trial.set_free_values(x_new);
                try {
                    f_new = functional.total(trial);
                } catch (const NumericalFailure&) {
                    continue;
                } catch (const ModelEvaluationError&) {
                    continue;
                }
                // Require a strict decrease so that steps lost in rounding count as failures.
                if (f_new <= f + opts.armijo_c1 * step * slope && f_new < f) {
                    accepted = true;
                    break;
                }
            }
            if (accepted) break;
            if (steepest) throw Stagnation(it, out.grad_norm, traj, out.history);
            s_mem.clear();
            y_mem.clear();
            steepest = true;
            d = -g;
            slope = -g.squaredNorm();
        }

        traj.set_free_values(x_new);
        out.report = functional.evaluate_with_gradient(traj, grad);
        out.grad_norm = energy::EnergyFunctional::gradient_norm(traj, grad);
        Eigen::VectorXd g_new = free_part(grad);
        Eigen::VectorXd s = x_new - x;
        Eigen::VectorXd y = g_new - g;
        if (s.dot(y) > 1e-14 * s.norm() * y.norm()) {
            s_mem.push_back(std::move(s));
            y_mem.push_back(std::move(y));
            if (static_cast<int>(s_mem.size()) > opts.memory) {
                s_mem.pop_front();
                y_mem.pop_front();
            }
        }
        x = std::move(x_new);
        g = std::move(g_new);
        f = out.report.total;
        out.iterations = it + 1;
        out.history.push_back({out.report.total, out.grad_norm});
    }
    return out;
}

Comparison compare(const Trajectory& a, const Trajectory& b) {
    if (!(a.grid() == b.grid()) || a.components() != b.components() ||
        a.intervals() != b.intervals()) {
        throw InvalidInput("trajectories differ in shape");
    }
    for (std::size_t i = 0; i < a.times().size(); ++i) {
        const double ta = a.times()[i];
        const double tb = b.times()[i];
        if (std::abs(ta - tb) > 1e-12 * std::max(1.0, std::abs(ta))) {
            throw InvalidInput("trajectories have different time nodes");
        }
    }
    const int m = a.intervals();
    const double w = a.step() * a.grid().cell_volume();
    double diff = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (int k = 0; k <= m; ++k) {
        const double wk = (k == 0 || k == m) ? 0.5 * w : w;
        diff += wk * (a.column(k) - b.column(k)).squaredNorm();
        na += wk * a.column(k).squaredNorm();
        nb += wk * b.column(k).squaredNorm();
    }
    Comparison c;
    const double denom = std::sqrt(std::max(na, nb));
    c.relative_l2 = denom > 0.0 ? std::sqrt(diff) / denom : 0.0;
    c.max_node = (a.states() - b.states()).cwiseAbs().maxCoeff();
    return c;
}

ProbeResult uniqueness_probe(const models::ModelSpec& model, const Field& w0, double t_end,
                             int intervals, SolveOptions opts, int n_seeds) {
    if (n_seeds < 2) throw InvalidInput("uniqueness probe needs at least two seeds");
    ProbeResult result;
    std::vector<Trajectory> minimizers;
    const std::uint64_t base = opts.seed;
    opts.init = InitKind::random;
    for (int i = 0; i < n_seeds; ++i) {
        opts.seed = base + static_cast<std::uint64_t>(i);
        const std::string tag = "seed " + std::to_string(opts.seed) + ": ";
        try {
            SolveOutcome run = minimize(model, initial_trajectory(w0, t_end, intervals, opts), opts);
            if (run.converged) {
                minimizers.push_back(std::move(run.trajectory));
                result.seed_status.push_back(tag + "converged in " + std::to_string(run.iterations) + " iterations");
            } else {
                result.seed_status.push_back(tag + "not converged after " + std::to_string(run.iterations) + " iterations");
            }
        } catch (const std::exception& e) {
            result.seed_status.push_back(tag + e.what());
        }
    }
    result.converged = static_cast<int>(minimizers.size());
    if (minimizers.size() < 2) throw NumericalFailure("fewer than two probe runs converged", 0.0);
    for (std::size_t i = 0; i < minimizers.size(); ++i) {
        for (std::size_t j = i + 1; j < minimizers.size(); ++j) {
            result.max_discrepancy =
                std::max(result.max_discrepancy, compare(minimizers[i], minimizers[j]).relative_l2);
        }
    }
    return result;
}

}  // namespace ben::solver
