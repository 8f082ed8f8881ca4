#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ben/discretization.hpp"
#include "ben/energy.hpp"
#include "ben/errors.hpp"
#include "ben/models.hpp"

namespace ben::solver {

enum class InitKind { constant, random };

struct SolveOptions {
    int max_iters = 5000;
    double grad_tol = 1e-10;
    double energy_tol = 1e-12;
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    int max_trials = 40;
    bool use_lbfgs = true;
    int memory = 10;
    std::uint64_t seed = 1;
    InitKind init = InitKind::constant;
    /// Relative amplitude of the random perturbation for InitKind::random.
    double init_noise = 0.5;

    /// Throws InvalidInput on nonpositive tolerances or memory.
    void validate() const;
};

struct HistoryEntry {
    double energy = 0.0;
    double grad_norm = 0.0;
};

struct SolveOutcome {
    disc::Trajectory trajectory;
    energy::EnergyReport report;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    std::vector<HistoryEntry> history;
};

/// Line search failed along both the quasi-Newton and steepest descent
/// directions. Carries the last accepted iterate.
class Stagnation : public NumericalFailure {
public:
    Stagnation(int iteration, double grad_norm, disc::Trajectory last,
               std::vector<HistoryEntry> history)
        : NumericalFailure("line search stalled at iteration " + std::to_string(iteration), grad_norm),
          iteration_(iteration), last_(std::move(last)), history_(std::move(history)) {}

    int iteration() const noexcept { return iteration_; }
    const disc::Trajectory& last_iterate() const noexcept { return last_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }

private:
    int iteration_;
    disc::Trajectory last_;
    std::vector<HistoryEntry> history_;
};

/// Starting trajectory: constant extension of w0, or w0 plus seeded noise
/// on u_1..u_M.
disc::Trajectory initial_trajectory(const disc::Field& w0, double t_end, int intervals,
                                    const SolveOptions& opts);

/// Minimizes J over u_1..u_M with u_0 fixed. Stops when the gradient norm
/// reaches grad_tol, normalized J reaches energy_tol, or after max_iters.
SolveOutcome minimize(const models::ModelSpec& model, const disc::Trajectory& init,
                      const SolveOptions& opts);

/// Backward Euler: h^d (u_{k+1} - u_k)/tau + Lambda(u_{k+1}) + lambda DPsi(lambda u_{k+1}) = 0
/// at t_{k+1}, by damped Newton. Throws StepFailure.
disc::Trajectory implicit_baseline(const models::ModelSpec& model, const disc::Field& w0,
                                   double t_end, int intervals);

struct Comparison {
    double relative_l2 = 0.0;  ///< L^2(0,T;H) difference over max of the two norms
    double max_node = 0.0;
};

/// Trapezoid rule in time, h^d-weighted in space. Throws InvalidInput on shape mismatch.
Comparison compare(const disc::Trajectory& a, const disc::Trajectory& b);

struct ProbeResult {
    double max_discrepancy = 0.0;
    int converged = 0;
    std::vector<std::string> seed_status;
};

/// Minimizes from n_seeds random starts (seeds opts.seed, opts.seed + 1, ...)
/// and reports the worst pairwise compare() among converged runs. Throws
/// NumericalFailure when fewer than two runs converge.
ProbeResult uniqueness_probe(const models::ModelSpec& model, const disc::Field& w0, double t_end,
                             int intervals, SolveOptions opts, int n_seeds);

}  // namespace ben::solver
