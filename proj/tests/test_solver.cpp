#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ben/discretization.hpp"
#include "ben/energy.hpp"
#include "ben/errors.hpp"
#include "ben/models.hpp"
#include "ben/solver.hpp"

using namespace ben;
using namespace ben::solver;
using disc::Field;
using disc::SpaceGrid;
using disc::Trajectory;

namespace {

Field sine(const SpaceGrid& g) {
    Field w(g, 1);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        w.values()[static_cast<Eigen::Index>(i)] = std::sin(std::numbers::pi * g.node_position(i)[0]);
    }
    return w;
}

Trajectory crank_nicolson(const Field& w0, double t_end, int m) {
    const SpaceGrid& g = w0.grid();
    const Eigen::SparseMatrix<double> gm = disc::gradient_matrix(g, 1);
    const Eigen::MatrixXd k = g.cell_volume() * Eigen::MatrixXd(gm.transpose() * gm);
    const double tau = t_end / m;
    const Eigen::MatrixXd mass = g.cell_volume() * Eigen::MatrixXd::Identity(k.rows(), k.rows());
    const Eigen::LDLT<Eigen::MatrixXd> lhs(mass / tau + 0.5 * k);
    Trajectory traj(w0, 0.0, t_end, m);
    for (int s = 0; s < m; ++s) traj.set_state(s + 1, lhs.solve((mass / tau - 0.5 * k) * traj.column(s)));
    return traj;
}

double exact_heat_error(int n, int m) {
    const SpaceGrid g(1, n);
    const models::ModelSpec heat = models::make_heat_model();
    const Trajectory base = implicit_baseline(heat, sine(g), 0.1, m);
    Trajectory exact(sine(g), 0.0, 0.1, m);
    for (int k = 1; k <= m; ++k) {
        exact.set_state(k, std::exp(-std::numbers::pi * std::numbers::pi * exact.times()[k]) * sine(g).values());
    }
    return compare(base, exact).relative_l2;
}

}  // namespace

TEST_CASE("options validation") {
    SolveOptions o;
    CHECK_NOTHROW(o.validate());
    o.grad_tol = 0.0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
    o = SolveOptions{};
    o.memory = 0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
    o = SolveOptions{};
    o.backtrack = 1.0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
    o = SolveOptions{};
    o.max_trials = 0;
    CHECK_THROWS_AS(o.validate(), InvalidInput);
}

TEST_CASE("initial trajectory") {
    const SpaceGrid g(1, 9);
    const Field w0 = sine(g);
    SolveOptions o;
    const Trajectory c = initial_trajectory(w0, 1.0, 5, o);
    for (int k = 0; k <= 5; ++k) CHECK(c.column(k) == w0.values());
    o.init = InitKind::random;
    const Trajectory r1 = initial_trajectory(w0, 1.0, 5, o);
    const Trajectory r2 = initial_trajectory(w0, 1.0, 5, o);
    CHECK(r1.states() == r2.states());
    CHECK(r1.column(0) == w0.values());
    CHECK((r1.column(3) - w0.values()).norm() > 0.1);
    o.seed = 2;
    CHECK(initial_trajectory(w0, 1.0, 5, o).states() != r1.states());
}

TEST_CASE("trivial problem is solved before the first iteration") {
    const SpaceGrid g(1, 9);
    const SolveOutcome out = minimize(models::make_heat_model(), Trajectory(Field(g, 1), 0.0, 0.1, 8), {});
    CHECK(out.converged);
    CHECK(out.iterations == 0);
    CHECK(out.trajectory.states().norm() == 0.0);
    CHECK(out.history.size() == 1);
}

TEST_CASE("implicit baseline examples") {
    // N = 1: h = 1/2, stiffness 4, so u_1 = h u_0 / (h + 4 tau) = u_0 / 2 at tau = 1/8.
    const SpaceGrid one(1, 1);
    const Trajectory t = implicit_baseline(models::make_heat_model(), Field(one, 1, Eigen::VectorXd::Ones(1)),
                                           0.125, 1);
    CHECK(t.column(1)[0] == doctest::Approx(0.5).epsilon(1e-14));

    const SpaceGrid g(1, 9);
    const Trajectory z = implicit_baseline(models::make_burgers_model(), Field(g, 1), 0.1, 4);
    CHECK(z.states().norm() == 0.0);
}

TEST_CASE("implicit baseline converges to the exact heat solution") {
    const double coarse = exact_heat_error(33, 64);
    const double fine = exact_heat_error(67, 128);
    const double ratio = coarse / fine;
    CAPTURE(coarse);
    CAPTURE(fine);
    CHECK(ratio >= 1.7);
    CHECK(ratio <= 4.5);
}

TEST_CASE("compare") {
    const SpaceGrid g(1, 7);
    Trajectory a(sine(g), 0.0, 1.0, 3);
    a.set_state(2, 3.0 * sine(g).values());
    Trajectory neg = a;
    for (int k = 0; k <= 3; ++k) {
        if (k > 0) neg.set_state(k, -a.column(k));
    }
    const Trajectory neg_all(g, 1, a.times(), -a.states(), true);
    CHECK(compare(a, a).relative_l2 == 0.0);
    CHECK(compare(a, neg_all).relative_l2 == doctest::Approx(2.0));
    CHECK(compare(a, neg).relative_l2 == doctest::Approx(compare(neg, a).relative_l2));
    CHECK(compare(a, neg_all).max_node == doctest::Approx(6.0 * a.column(2).maxCoeff() / 3.0));
    CHECK_THROWS_AS(compare(a, Trajectory(sine(g), 0.0, 1.0, 4)), InvalidInput);
    CHECK_THROWS_AS(compare(a, Trajectory(Field(SpaceGrid(1, 8), 1), 0.0, 1.0, 3)), InvalidInput);
    CHECK_THROWS_AS(compare(a, Trajectory(sine(g), 0.0, 2.0, 3)), InvalidInput);
}

TEST_CASE("heat minimizer is the Crank-Nicolson trajectory") {
    const SpaceGrid g(1, 17);
    const Field w0 = sine(g);
    SolveOptions o;
    o.init = InitKind::random;
    o.seed = 3;
    o.grad_tol = 1e-12;
    o.energy_tol = 1e-14;
    o.max_iters = 20000;
    const Trajectory init = initial_trajectory(w0, 0.1, 16, o);
    SolveOutcome out{init, {}, 0, false, 0.0, {}};
    try {
        out = minimize(models::make_heat_model(), init, o);
    } catch (const Stagnation& e) {
        out.trajectory = e.last_iterate();
        out.history = e.history();
    }
    CHECK(compare(out.trajectory, crank_nicolson(w0, 0.1, 16)).relative_l2 <= 1e-6);
    CHECK(out.trajectory.column(0) == w0.values());
    for (std::size_t i = 1; i < out.history.size(); ++i) {
        CHECK(out.history[i].energy < out.history[i - 1].energy);
    }
    const SolveOutcome again = minimize(models::make_heat_model(), init, o);
    CHECK(again.trajectory.states() == out.trajectory.states());
    CHECK(again.iterations == out.iterations);
}

TEST_CASE("steepest descent mode also decreases the energy") {
    const SpaceGrid g(1, 9);
    SolveOptions o;
    o.use_lbfgs = false;
    o.init = InitKind::random;
    o.max_iters = 50;
    const Trajectory init = initial_trajectory(sine(g), 0.1, 8, o);
    const double j0 = energy::eval_energy(models::make_burgers_model(), init).total;
    try {
        const SolveOutcome out = minimize(models::make_burgers_model(), init, o);
        CHECK(out.report.total < j0);
        CHECK(out.iterations <= 50);
    } catch (const Stagnation& e) {
        CHECK(energy::eval_energy(models::make_burgers_model(), e.last_iterate()).total < j0);
    }
}

TEST_CASE("a single line-search trial stagnates") {
    const SpaceGrid g(1, 33);
    SolveOptions o;
    o.max_trials = 1;
    o.init = InitKind::random;
    const Trajectory init = initial_trajectory(sine(g), 0.1, 64, o);
    try {
        minimize(models::make_heat_model(), init, o);
        FAIL("expected Stagnation");
    } catch (const Stagnation& e) {
        CHECK(e.iteration() == 0);
        CHECK(e.last_iterate().states() == init.states());
        CHECK(e.history().size() == 1);
        CHECK(e.residual() > 0.0);
    }
}

TEST_CASE("minimize rejects unlocked starts") {
    const SpaceGrid g(1, 5);
    const Trajectory unlocked(g, 1, {0.0, 1.0}, Eigen::MatrixXd::Zero(5, 2), false);
    CHECK_THROWS_AS(minimize(models::make_heat_model(), unlocked, {}), InvalidInput);
}

TEST_CASE("uniqueness probe") {
    const SpaceGrid g(1, 9);
    SolveOptions o;
    o.grad_tol = 1e-11;
    o.energy_tol = 1e-14;
    o.max_iters = 20000;
    // Zero data: relative spread is meaningless near the zero minimizer, so
    // check the iterates themselves.
    const ProbeResult trivial = uniqueness_probe(models::make_heat_model(), Field(g, 1), 0.1, 8, o, 3);
    CHECK(trivial.converged == 3);
    CHECK(trivial.seed_status.size() == 3);
    o.init = InitKind::random;
    for (std::uint64_t seed : {1u, 2u}) {
        o.seed = seed;
        const SolveOutcome run =
            minimize(models::make_heat_model(), initial_trajectory(Field(g, 1), 0.1, 8, o), o);
        CAPTURE(seed);
        CHECK(run.trajectory.states().cwiseAbs().maxCoeff() <= 1e-5);
    }

    const ProbeResult heat = uniqueness_probe(models::make_heat_model(), sine(g), 0.1, 8, o, 3);
    CHECK(heat.converged >= 2);
    CHECK(heat.max_discrepancy <= 1e-4);
    CHECK_THROWS_AS(uniqueness_probe(models::make_heat_model(), sine(g), 0.1, 8, o, 1), InvalidInput);
}
