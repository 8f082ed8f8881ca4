#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ben/errors.hpp"
#include "ben/integrated_density.hpp"
#include "ben/models.hpp"
#include "ben/parallel.hpp"

namespace ben::models {
namespace {

using disc::Field;
using disc::SpaceGrid;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Random field drawn from one of three families: nodal noise, a few
/// low-frequency modes, or a single-node spike.
Eigen::VectorXd draw_field(std::mt19937_64& rng, const SpaceGrid& grid, int components,
                           double amplitude) {
    const auto n = grid.node_count();
    const double pi = std::numbers::pi;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(components * n));
    const double scale = amplitude * unit(rng);
    const int family = static_cast<int>(unit(rng) * 3.0);
    for (int c = 0; c < components; ++c) {
        auto seg = v.segment(static_cast<Eigen::Index>(c * n), static_cast<Eigen::Index>(n));
        if (family == 0) {
            for (Eigen::Index i = 0; i < seg.size(); ++i) seg[i] = scale * normal(rng);
        } else if (family == 1) {
            for (int mode = 1; mode <= 3; ++mode) {
                const double coef = scale * normal(rng) / mode;
                const int mode_y = 1 + static_cast<int>(unit(rng) * 3.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const auto p = grid.node_position(i);
                    double s = std::sin(mode * pi * p[0]);
                    if (grid.dimension() == 2) s *= std::sin(mode_y * pi * p[1]);
                    seg[static_cast<Eigen::Index>(i)] += coef * s;
                }
            }
        } else {
            const auto node = std::min(n - 1, static_cast<std::size_t>(unit(rng) * static_cast<double>(n)));
            seg[static_cast<Eigen::Index>(node)] = scale * normal(rng);
        }
    }
    return v;
}

double normalized_margin(double lhs, double rhs) {
    return (lhs - rhs) / (1.0 + std::abs(lhs) + std::abs(rhs));
}

struct Sample {
    Eigen::VectorXd x;
    Eigen::VectorXd h;
    double t = 0.0;
};

}  // namespace

const char* condition_name(Condition c) {
    switch (c) {
        case Condition::growth: return "growth";
        case Condition::deriv_growth: return "deriv_growth";
        case Condition::monotonicity: return "monotonicity";
        case Condition::positivity: return "positivity";
        case Condition::uniform_convexity: return "uniform_convexity";
        case Condition::lipschitz: return "lipschitz";
    }
    return "unknown";
}

Condition parse_condition(const std::string& name) {
    for (Condition c : all_conditions()) {
        if (name == condition_name(c)) return c;
    }
    throw InvalidInput("unknown condition '" + name + "'");
}

std::vector<Condition> all_conditions() {
    return {Condition::growth,     Condition::deriv_growth,      Condition::monotonicity,
            Condition::positivity, Condition::uniform_convexity, Condition::lipschitz};
}

HypothesisConstants derive_constants(const ModelSpec& model, const SpaceGrid& grid, double radius) {
    const double pi = std::numbers::pi;
    const double a = model.density.coefficient();
    const double q = model.density.exponent();
    const double eps = model.density.regularizer();
    const double qs = q / (q - 1.0);
    const double h = grid.spacing();
    const double d = grid.dimension();
    const double vol = grid.cell_volume();
    const double edge_measure = static_cast<double>(grid.edge_count()) * vol;
    // |grad u|_{L2} <= kappa |u|_X by Hoelder over the edge measure.
    const double kappa = std::pow(edge_measure, 0.5 - 1.0 / q);
    // Extreme eigenvalues of G^T G.
    const double lambda_min = d * 4.0 / (h * h) * std::pow(std::sin(0.5 * pi * h), 2);
    const double lambda_max = d * 4.0 / (h * h) * std::pow(std::cos(0.5 * pi * h), 2);
    const double poincare = 1.0 / std::sqrt(lambda_min);

    const double l_theta = model.reaction ? model.reaction->lipschitz : 0.0;
    double l_flux = model.flux ? model.flux->lipschitz : 0.0;
    double flux_zero = model.flux ? model.flux->zero_bound : 0.0;
    if (model.scalar_flux) {
        const auto& f = *model.scalar_flux;
        const double dir_norm = std::hypot(f.direction[0], grid.dimension() == 2 ? f.direction[1] : 0.0);
        l_flux += f.lipschitz * dir_norm;
        flux_zero += std::abs(f.profile(0.0)) * dir_norm;
    }
    const double theta_zero = model.reaction ? model.reaction->zero_bound : 0.0;

    HypothesisConstants c;

    // Growth: psi >= (a/q)|x|^q and the quadratic part is at most (eps/2) kappa^2 (|x|^q + 1).
    const double c0_growth = std::max(q / a, a / q + 0.5 * eps * kappa * kappa);
    double c0_convex = c0_growth;
    if (q == 2.0) {
        c0_convex = 2.0 / (a + eps);
    } else if (eps > 0.0) {
        // Only the eps part is quadratic; |grad h|_{L2}^2 >= h^{d(1-2/q)} |h|_X^2.
        const double inverse = std::pow(vol, 1.0 - 2.0 / q);
        c0_convex = (std::pow(radius, q - 2.0) + 1.0) / (eps * inverse);
    }
    c.c0 = std::max(c0_growth, c0_convex);

    // |DLambda h|_{H^-1} <= (L_flux + L_theta C_P) |h|_{L2}, and the dual
    // norm surrogate costs a factor V^{1/2 - 1/q}.
    const double k_lip = l_flux + l_theta * poincare;
    c.g = k_lip * poincare * std::pow(edge_measure, 1.0 - 2.0 / q);
    c.mu = 1.0;

    const double coercive = model.lambda * ((q == 2.0 ? a : 0.0) + eps);
    c.g_hat = l_theta + (coercive > 0.0 ? l_flux * l_flux / (4.0 * coercive)
                                         : l_flux * std::sqrt(lambda_max));
    c.mu_hat = 1.0;

    // Positivity via Young's inequality ab <= delta a^q + C_delta b^{q*}.
    const double coef = a / q + (q == 2.0 ? 0.5 * eps : 0.0);
    const double delta = 0.25 * coef;
    const double c_delta = std::pow(delta * q, -1.0 / (q - 1.0)) / qs;
    const double zero_term = std::sqrt(edge_measure) * flux_zero * kappa;
    const double lip_term = l_flux * kappa;
    const double on_norm = c_delta * std::pow(lip_term, qs) + l_theta + 0.5 * theta_zero;
    const double constant =
        c_delta * (std::pow(zero_term, qs) + std::pow(lip_term, qs)) + 0.5 * theta_zero;
    c.c_tilde = 2.0 / coef;
    c.mu_bar = std::max(on_norm, constant);

    const auto& decl = model.declared;
    if (decl.g) c.g = *decl.g;
    if (decl.g_hat) c.g_hat = *decl.g_hat;
    if (decl.mu_bar) c.mu_bar = *decl.mu_bar;
    if (decl.c_tilde) c.c_tilde = *decl.c_tilde;
    if (decl.c0) c.c0 = *decl.c0;
    return c;
}

ConditionReport check_condition(const ModelSpec& model, const SpaceGrid& grid,
                                Condition condition, const SamplerConfig& sampler) {
    model.validate();
    if (sampler.samples == 0) throw InvalidInput("sampler needs at least one sample");
    const int k = model.components;
    const energy::IntegratedDensity psi(model.density, grid, k);
    const double q = model.density.exponent();
    const double lambda = model.lambda;

    std::vector<Sample> samples(sampler.samples);
    parallel_for(samples.size(), [&](std::size_t i) {
        std::mt19937_64 rng(splitmix64(sampler.seed ^ splitmix64(i + 1)));
        samples[i].x = draw_field(rng, grid, k, sampler.amplitude);
        samples[i].h = draw_field(rng, grid, k, sampler.amplitude);
        samples[i].t = std::uniform_real_distribution<double>(0.0, sampler.t_end)(rng);
    }, 64);

    double radius = 0.0;
    for (const auto& s : samples) radius = std::max(radius, psi.x_norm(s.x));

    ConditionReport report;
    report.condition = condition;
    report.samples = samples.size();
    report.constants = derive_constants(model, grid, radius);
    const HypothesisConstants& c = report.constants;
    const double vol = grid.cell_volume();

    std::vector<double> margins(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const Sample& s = samples[i];
        const Field x(grid, k, s.x);
        const Field h(grid, k, s.h);
        const double x_norm = psi.x_norm(s.x);
        const double h_norm = psi.x_norm(s.h);
        const double h_sq = vol * s.h.squaredNorm();
        double margin = 0.0;
        switch (condition) {
            case Condition::growth: {
                const double value = psi.value(s.x);
                const double xq = std::pow(x_norm, q);
                margin = std::min(normalized_margin(value, xq / c.c0 - c.c0),
                                  normalized_margin(c.c0 * xq + c.c0, value));
                break;
            }
            case Condition::deriv_growth: {
                const double lhs = dual_norm(lambda_directional(model, x, s.t, h), q);
                const double rhs =
                    c.g * (std::pow(x_norm, q - 2.0) + std::pow(c.mu, (q - 2.0) / q)) * h_norm;
                margin = normalized_margin(rhs, lhs);
                break;
            }
            case Condition::lipschitz: {
                const Field x2(grid, k, s.x + s.h);
                const Eigen::VectorXd diff =
                    apply_lambda(model, x2, s.t).values() - apply_lambda(model, x, s.t).values();
                const double lhs = dual_norm(Field(grid, k, diff), q);
                margin = normalized_margin(c.g * h_norm, lhs);
                break;
            }
            case Condition::monotonicity: {
                const Eigen::VectorXd base = lambda * s.x;
                const Eigen::VectorXd convex_part =
                    lambda * (psi.gradient(base + s.h) - psi.gradient(base));
                const Eigen::VectorXd linear_part = lambda_directional(model, x, s.t, h).values();
                const double lhs = s.h.dot(convex_part + linear_part);
                const double rhs = -c.g_hat * (std::pow(x_norm, q) + c.mu_hat) * h_sq;
                margin = normalized_margin(lhs, rhs);
                break;
            }
            case Condition::positivity: {
                const double lhs = psi.value(s.x) + s.x.dot(apply_lambda(model, x, s.t).values());
                const double rhs =
                    std::pow(x_norm, q) / c.c_tilde - c.mu_bar * (vol * s.x.squaredNorm() + 1.0);
                margin = normalized_margin(lhs, rhs);
                break;
            }
            case Condition::uniform_convexity: {
                const double lhs = s.h.dot(psi.gradient(s.x + s.h) - psi.gradient(s.x));
                const double rhs = (std::pow(x_norm, q - 2.0) + 1.0) * h_norm * h_norm / c.c0;
                margin = normalized_margin(lhs, rhs);
                break;
            }
        }
        margins[i] = margin;
    }, 64);

    report.worst_margin = *std::min_element(margins.begin(), margins.end());
    report.pass = report.worst_margin >= -kConditionTolerance;

    std::vector<std::size_t> failing;
    for (std::size_t i = 0; i < margins.size(); ++i) {
        if (margins[i] < -kConditionTolerance) failing.push_back(i);
    }
    std::stable_sort(failing.begin(), failing.end(),
                     [&](std::size_t l, std::size_t r) { return margins[l] < margins[r]; });
    if (failing.size() > 5) failing.resize(5);
    for (std::size_t i : failing) {
        Witness w;
        w.x.assign(samples[i].x.data(), samples[i].x.data() + samples[i].x.size());
        w.h.assign(samples[i].h.data(), samples[i].h.data() + samples[i].h.size());
        w.t = samples[i].t;
        w.margin = margins[i];
        report.witnesses.push_back(std::move(w));
    }
    return report;
}

}  // namespace ben::models
