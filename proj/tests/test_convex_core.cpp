#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ben/convex_core.hpp"
#include "ben/errors.hpp"

using namespace ben;
using convex::PowerDensity;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// sup_z z*y - psi(z) over a grid, refined twice around the best point.
double brute_force_conjugate_1d(const PowerDensity& d, double y, double* arg) {
    double lo = -10.0;
    double hi = 10.0;
    double best = -1e300;
    double best_z = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        const int n = 20001;
        for (int i = 0; i < n; ++i) {
            const double z = lo + (hi - lo) * i / (n - 1);
            const double v = z * y - (d.coefficient() / d.exponent() * std::pow(std::abs(z), d.exponent()) +
                                      0.5 * d.regularizer() * z * z);
            if (v > best) {
                best = v;
                best_z = z;
            }
        }
        const double width = (hi - lo) / 100.0;
        lo = best_z - width;
        hi = best_z + width;
    }
    if (arg) *arg = best_z;
    return best;
}

double brute_force_conjugate_2d(double y0, double y1) {
    // q = 2, a = 1: sup over a square grid around the origin, then refined.
    double best = -1e300;
    double cx = 0.0, cy = 0.0, half = 10.0;
    for (int pass = 0; pass < 4; ++pass) {
        double bx = cx, by = cy;
        const int n = 401;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const double x = cx - half + 2.0 * half * i / (n - 1);
                const double z = cy - half + 2.0 * half * j / (n - 1);
                const double v = x * y0 + z * y1 - 0.5 * (x * x + z * z);
                if (v > best) {
                    best = v;
                    bx = x;
                    by = z;
                }
            }
        }
        cx = bx;
        cy = by;
        half /= 50.0;
    }
    return best;
}

std::vector<PowerDensity> densities() {
    return {PowerDensity(1.0, 2.0, 0.0), PowerDensity(1.0, 3.0, 0.0), PowerDensity(1.0, 4.0, 0.0),
            PowerDensity(0.5, 4.0, 0.2), PowerDensity(2.0, 2.5, 0.1)};
}

Eigen::VectorXd random_vec(std::mt19937_64& rng, int k, double amp) {
    std::uniform_real_distribution<double> u(-amp, amp);
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v[i] = u(rng);
    return v;
}

}  // namespace

TEST_CASE("density parameters are validated") {
    CHECK_THROWS_AS(PowerDensity(0.0, 2.0), InvalidInput);
    CHECK_THROWS_AS(PowerDensity(1.0, 1.5), InvalidInput);
    CHECK_THROWS_AS(PowerDensity(1.0, 2.0, -1.0), InvalidInput);
    CHECK_NOTHROW(PowerDensity(1.0, 2.0, 0.0));
}

TEST_CASE("eval_psi examples") {
    CHECK(convex::eval_psi(PowerDensity(1, 2, 0), vec({3, 4})) == doctest::Approx(12.5));
    for (const auto& d : densities()) CHECK(convex::eval_psi(d, vec({0, 0})) == 0.0);
    CHECK(convex::eval_psi(PowerDensity(1, 4, 0), vec({2})) == doctest::Approx(4.0));
    CHECK_THROWS_AS(convex::eval_psi(PowerDensity(1, 2, 0), vec({NAN, 1})), InvalidInput);
    CHECK_THROWS_AS(convex::eval_psi(PowerDensity(1, 2, 0), vec({INFINITY})), InvalidInput);
}

TEST_CASE("grad_psi examples") {
    const Eigen::VectorXd g = convex::grad_psi(PowerDensity(1, 2, 0), vec({3, 4}));
    CHECK(g[0] == doctest::Approx(3.0));
    CHECK(g[1] == doctest::Approx(4.0));
    for (const auto& d : densities()) CHECK(convex::grad_psi(d, vec({0, 0})).norm() == 0.0);
    const Eigen::VectorXd u = convex::grad_psi(PowerDensity(1, 4, 0), vec({1, 0}));
    CHECK(u[0] == doctest::Approx(1.0));
    CHECK(u[1] == 0.0);
}

TEST_CASE("grad_psi obeys the norm bound and matches finite differences") {
    std::mt19937_64 rng(3);
    for (const auto& d : densities()) {
        for (int s = 0; s < 200; ++s) {
            const Eigen::VectorXd x = random_vec(rng, 3, 3.0);
            const Eigen::VectorXd g = convex::grad_psi(d, x);
            const double r = x.norm();
            CHECK(g.norm() <= d.coefficient() * std::pow(r, d.exponent() - 1) + d.regularizer() * r + 1e-12);
            for (int i = 0; i < 3; ++i) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
                e[i] = 1e-6;
                const double fd = (convex::eval_psi(d, x + e) - convex::eval_psi(d, x - e)) / 2e-6;
                CHECK(fd == doctest::Approx(g[i]).epsilon(1e-6).scale(1.0));
            }
        }
    }
}

TEST_CASE("hess_psi matches finite differences of the gradient") {
    std::mt19937_64 rng(5);
    for (const auto& d : densities()) {
        const Eigen::VectorXd x = random_vec(rng, 2, 2.0);
        const Eigen::MatrixXd h = convex::hess_psi(d, x);
        for (int j = 0; j < 2; ++j) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
            e[j] = 1e-6;
            const Eigen::VectorXd fd = (convex::grad_psi(d, x + e) - convex::grad_psi(d, x - e)) / 2e-6;
            CHECK((fd - h.col(j)).norm() <= 1e-6 * (1.0 + h.norm()));
        }
    }
}

TEST_CASE("eval_conjugate examples against a brute-force sup") {
    const PowerDensity quad(1, 2, 0);
    const auto c = convex::eval_conjugate(quad, vec({3, 4}));
    CHECK(c.value == doctest::Approx(12.5).epsilon(1e-12));
    CHECK(c.argmax[0] == doctest::Approx(3.0));
    CHECK(c.argmax[1] == doctest::Approx(4.0));
    CHECK(brute_force_conjugate_2d(3, 4) == doctest::Approx(c.value).epsilon(1e-8));

    for (const auto& d : densities()) {
        const auto z = convex::eval_conjugate(d, vec({0, 0}));
        CHECK(z.value == 0.0);
        CHECK(z.argmax.norm() == 0.0);
    }

    const PowerDensity quartic(1, 4, 0);
    double arg = 0.0;
    const double oracle = brute_force_conjugate_1d(quartic, 1.0, &arg);
    const auto q4 = convex::eval_conjugate(quartic, vec({1}));
    CHECK(oracle == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(q4.value == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(q4.argmax[0] == doctest::Approx(arg).epsilon(1e-4));
}

TEST_CASE("eval_conjugate agrees with the brute-force sup for regularized densities") {
    for (const auto& d : densities()) {
        for (double y : {-3.0, -0.4, 0.7, 2.5}) {
            const double oracle = brute_force_conjugate_1d(d, y, nullptr);
            CHECK(convex::eval_conjugate(d, vec({y})).value == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("fenchel_gap examples") {
    const PowerDensity quad(1, 2, 0);
    const Eigen::VectorXd x = vec({3, 4});
    CHECK(std::abs(convex::fenchel_gap(quad, x, convex::grad_psi(quad, x))) <= 1e-12);
    CHECK(convex::fenchel_gap(quad, vec({0, 0}), vec({0, 0})) == 0.0);
    CHECK(convex::fenchel_gap(quad, vec({1, 0}), vec({0, 1})) == doctest::Approx(1.0));
}

TEST_CASE("invert_profile_slope solves the radial equation") {
    for (const auto& d : densities()) {
        for (double s : {1e-8, 1e-3, 0.5, 1.0, 10.0, 1e3, 1e6}) {
            int iters = 0;
            const double r = convex::invert_profile_slope(d, s, &iters);
            CHECK(d.profile_slope(r) == doctest::Approx(s).epsilon(1e-10));
            CHECK(iters <= 200);
        }
        CHECK(convex::invert_profile_slope(d, 0.0) == 0.0);
    }
}

TEST_CASE("property: Fenchel-Young gap is nonnegative") {
    std::mt19937_64 rng(11);
    for (const auto& d : densities()) {
        double worst = 0.0;
        for (int s = 0; s < 10000; ++s) {
            const int k = 1 + s % 3;
            const Eigen::VectorXd x = random_vec(rng, k, 3.0);
            const Eigen::VectorXd y = random_vec(rng, k, 5.0);
            worst = std::min(worst, convex::fenchel_gap(d, x, y));
        }
        CHECK(worst >= -1e-12);
    }
}

TEST_CASE("property: the conjugate argmax inverts the gradient") {
    std::mt19937_64 rng(13);
    for (const auto& d : densities()) {
        for (int s = 0; s < 2000; ++s) {
            const Eigen::VectorXd y = random_vec(rng, 2, 20.0);
            const auto c = convex::eval_conjugate(d, y);
            const Eigen::VectorXd back = convex::grad_psi(d, c.argmax);
            CHECK((back - y).norm() <= 1e-10 * (1.0 + y.norm()));
            // Fenchel-Young equality at the argmax
            CHECK(std::abs(c.value - (c.argmax.dot(y) - convex::eval_psi(d, c.argmax))) <=
                  1e-10 * (1.0 + c.value));
            CHECK(c.value >= 0.0);
        }
    }
}

TEST_CASE("property: monotone gradient, strict when the density is strictly convex") {
    std::mt19937_64 rng(17);
    for (const auto& d : densities()) {
        for (int s = 0; s < 10000; ++s) {
            const Eigen::VectorXd a = random_vec(rng, 2, 3.0);
            const Eigen::VectorXd b = random_vec(rng, 2, 3.0);
            const double m = (convex::grad_psi(d, a) - convex::grad_psi(d, b)).dot(a - b);
            CHECK(m >= 0.0);
            if ((a - b).norm() > 1e-6) CHECK(m > 0.0);
        }
    }
}

TEST_CASE("property: conjugate grows like |y|^q*") {
    std::mt19937_64 rng(19);
    for (const auto& d : densities()) {
        const double qs = d.dual_exponent();
        double lo = 1e300;
        double hi = 0.0;
        std::uniform_real_distribution<double> logr(0.0, 3.0);
        for (int s = 0; s < 2000; ++s) {
            Eigen::VectorXd y = random_vec(rng, 2, 1.0);
            y *= std::pow(10.0, logr(rng)) / y.norm();
            const double ratio = convex::eval_conjugate(d, y).value / std::pow(y.norm(), qs);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        CHECK(lo > 0.0);
        CHECK(hi < 1e3);
        // Pure power densities are exactly homogeneous: psi*(y) = (1/q*) a^{-1/(q-1)} |y|^{q*}.
        if (d.regularizer() == 0.0) {
            const double exact = std::pow(d.coefficient(), -1.0 / (d.exponent() - 1.0)) / qs;
            CHECK(lo == doctest::Approx(exact).epsilon(1e-9));
            CHECK(hi == doctest::Approx(exact).epsilon(1e-9));
        }
    }
}

TEST_CASE("growth constant brackets the profile") {
    for (const auto& d : densities()) {
        const double c0 = d.growth_constant();
        for (double r = 0.0; r < 50.0; r += 0.01) {
            const double p = d.profile(r);
            const double rq = std::pow(r, d.exponent());
            CHECK(p >= rq / c0 - c0);
            CHECK(p <= c0 * rq + c0);
        }
    }
}

TEST_CASE("bregman equals the Fenchel gap at y = Dpsi(z)") {
    std::mt19937_64 rng(23);
    for (const auto& d : densities()) {
        for (int s = 0; s < 200; ++s) {
            const Eigen::VectorXd x = random_vec(rng, 2, 2.0);
            const Eigen::VectorXd z = random_vec(rng, 2, 2.0);
            const double b = convex::bregman(d, x, z);
            const double gap = convex::fenchel_gap(d, x, convex::grad_psi(d, z));
            CHECK(b >= 0.0);
            CHECK(b == doctest::Approx(gap).epsilon(1e-9).scale(1.0));
        }
    }
}
