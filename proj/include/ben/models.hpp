#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "ben/convex_core.hpp"
#include "ben/discretization.hpp"

namespace ben::models {

using Point = std::array<double, 2>;

/// Reaction Theta(B, x, t): R^k -> R^k, globally Lipschitz in B.
struct ReactionMap {
    /// out[i] = Theta_i(B, x, t)
    std::function<void(const double* b, const Point& x, double t, double* out)> value;
    /// jac[i * k + j] = d Theta_i / d B_j
    std::function<void(const double* b, const Point& x, double t, double* jac)> jacobian;
    double lipschitz = 0.0;
    /// Upper bound on |Theta(0, x, t)| over the domain and time.
    double zero_bound = 0.0;
};

/// Flux Xi(B, x, t): R^k -> R^{k x d}, row-major out[c * d + axis].
struct FluxMap {
    std::function<void(const double* b, const Point& x, double t, double* out)> value;
    /// jac[(c * d + axis) * k + j] = d Xi_{c,axis} / d B_j
    std::function<void(const double* b, const Point& x, double t, double* jac)> jacobian;
    /// Lipschitz constant in the Frobenius norm.
    double lipschitz = 0.0;
    double zero_bound = 0.0;
};

/// Scalar flux F(u) = f(u) * direction for single-component models.
struct ScalarFlux {
    std::function<double(double)> profile;
    std::function<double(double)> slope;
    Point direction{1.0, 0.0};
    /// Lipschitz constant of f (the vector flux has lipschitz * |direction|).
    double lipschitz = 0.0;
};

/// F(u) = u^2/2 for |u| <= u_max, continued linearly (C^1, Lipschitz u_max).
ScalarFlux truncated_burgers_flux(double u_max, Point direction = {1.0, 0.0});

/// Constants asserted for the structural hypotheses. Unset entries are
/// derived from the Lipschitz data by derive_constants().
struct DeclaredConstants {
    std::optional<double> g;
    std::optional<double> g_hat;
    std::optional<double> mu_bar;
    std::optional<double> c_tilde;
    std::optional<double> c0;
};

/// Evolution ingredients: Psi(u) = sum_edges h^d psi(grad u), lambda flag,
/// and the Lambda_t parts.
///
/// <delta, Lambda_t(u)> = sum_e h^d (Xi - F)(u)_e . (grad delta)_e
///                        - sum_i h^d Theta(u_i) . delta_i
/// with edge values of Xi and F taken as the average of the two endpoint
/// evaluations (boundary endpoints use B = 0). This is the weak form of
/// du/dt + div F(u) = Theta + div Xi + div DPhi(grad u).
struct ModelSpec {
    std::string name = "heat";
    convex::PowerDensity density{1.0, 2.0, 0.0};
    int lambda = 1;
    int components = 1;
    std::optional<ReactionMap> reaction;
    std::optional<FluxMap> flux;
    std::optional<ScalarFlux> scalar_flux;
    DeclaredConstants declared;

    bool has_lambda() const noexcept { return reaction || flux || scalar_flux; }
    /// Throws InvalidInput on inconsistent data (lambda flag, scalar flux with k > 1, ...).
    void validate() const;
};

ModelSpec make_heat_model(double q = 2.0, double a = 1.0, double eps = 0.0, int lambda = 1);
ModelSpec make_burgers_model(double u_max = 10.0, double q = 2.0, double a = 1.0,
                             double eps = 0.0, int dimension = 1);

struct DivergenceFormParams {
    double q = 2.0;
    double a = 1.0;
    double eps = 0.0;
    int components = 1;
    int dimension = 1;
    double damping = 1.0;    ///< Theta = -damping * B + ...
    double coupling = 0.5;   ///< cyclic skew coupling between components
    double advection = 1.0;  ///< Xi_{c,axis} = advection * sin(B_c) * (1 + sin(2 pi t)/2)
    double source = 1.0;     ///< Theta(0) = source * sin(pi x) [sin(pi y)] cos(pi t)
};
ModelSpec make_divergence_model(const DivergenceFormParams& params);

/// Heat model plus Theta(B) = +kappa B with declared mu_bar. Meant to violate
/// the positivity hypothesis when kappa is large against mu_bar.
ModelSpec make_adversarial_model(double kappa, double declared_mu_bar);

/// Assembles the dual vector <delta_i, Lambda_t(u)> for every nodal test
/// function. Throws ModelEvaluationError on non-finite model output.
disc::Field apply_lambda(const ModelSpec& model, const disc::Field& state, double t);

/// Sparse Jacobian DLambda_t(u) (rows: test functions, cols: nodal unknowns).
Eigen::SparseMatrix<double> lambda_jacobian(const ModelSpec& model, const disc::Field& state,
                                            double t);

/// DLambda_t(u) . h computed from the local derivatives without assembling.
disc::Field lambda_directional(const ModelSpec& model, const disc::Field& state, double t,
                               const disc::Field& direction);

// ---------------------------------------------------------------------------
// Structural hypothesis checks.

enum class Condition { growth, deriv_growth, monotonicity, positivity, uniform_convexity, lipschitz };

const char* condition_name(Condition c);
/// Throws InvalidInput for unknown names.
Condition parse_condition(const std::string& name);
std::vector<Condition> all_conditions();

/// Constants used by the hypothesis inequalities; functions g, g_hat and
/// mu, mu_hat, mu_bar are taken constant.
struct HypothesisConstants {
    double c0 = 0.0;       ///< growth and uniform convexity
    double g = 0.0;        ///< derivative growth and Lipschitz bound
    double mu = 1.0;
    double g_hat = 0.0;    ///< monotonicity
    double mu_hat = 1.0;
    double c_tilde = 0.0;  ///< positivity
    double mu_bar = 0.0;
};

/// Derives valid constants for the model on the given grid. For q > 2 the
/// uniform convexity constant only holds on the ball |x|_X <= radius.
HypothesisConstants derive_constants(const ModelSpec& model, const disc::SpaceGrid& grid,
                                     double radius);

struct SamplerConfig {
    std::size_t samples = 10000;
    double amplitude = 2.0;
    double t_end = 1.0;
    std::uint64_t seed = 1;
};

struct Witness {
    std::vector<double> x;
    std::vector<double> h;
    double t = 0.0;
    double margin = 0.0;
};

struct ConditionReport {
    Condition condition = Condition::growth;
    std::size_t samples = 0;
    double worst_margin = 0.0;
    std::vector<Witness> witnesses;
    HypothesisConstants constants;
    bool pass = false;
};

/// Verdict threshold on the normalized margin (lhs - rhs)/(1 + |lhs| + |rhs|).
inline constexpr double kConditionTolerance = 1e-9;

ConditionReport check_condition(const ModelSpec& model, const disc::SpaceGrid& grid,
                                Condition condition, const SamplerConfig& sampler);

/// Dual norm surrogate |G r|_{L^{q*}} with h^d G^T G r = y. Exact H^{-1}
/// norm for q = 2 and an upper bound on the X* norm otherwise.
double dual_norm(const disc::Field& y, double q);

}  // namespace ben::models
