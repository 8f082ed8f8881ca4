#include "ben/models.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "ben/errors.hpp"

namespace ben::models {
namespace {

using disc::Edge;
using disc::Field;
using disc::SpaceGrid;

/// Per-node flux values (Xi - F) laid out [c * d + axis], evaluated at a
/// nodal state vector b.
void node_flux(const ModelSpec& model, int dim, const double* b, const Point& x, double t,
               double* out) {
    const int k = model.components;
    for (int i = 0; i < k * dim; ++i) out[i] = 0.0;
    if (model.flux) model.flux->value(b, x, t, out);
    if (model.scalar_flux) {
        const double f = model.scalar_flux->profile(b[0]);
        for (int axis = 0; axis < dim; ++axis) {
            out[axis] -= f * model.scalar_flux->direction[static_cast<std::size_t>(axis)];
        }
    }
}

/// d(Xi - F)_{c,axis} / dB_j laid out [(c * d + axis) * k + j].
void node_flux_jacobian(const ModelSpec& model, int dim, const double* b, const Point& x,
                        double t, double* out) {
    const int k = model.components;
    for (int i = 0; i < k * dim * k; ++i) out[i] = 0.0;
    if (model.flux) model.flux->jacobian(b, x, t, out);
    if (model.scalar_flux) {
        const double s = model.scalar_flux->slope(b[0]);
        for (int axis = 0; axis < dim; ++axis) {
            out[axis] -= s * model.scalar_flux->direction[static_cast<std::size_t>(axis)];
        }
    }
}

void require_finite(const double* v, int n, std::size_t node, double t, const char* what) {
    for (int i = 0; i < n; ++i) {
        if (!std::isfinite(v[i])) throw ModelEvaluationError(std::string("non-finite ") + what, node, t);
    }
}

std::vector<double> nodal_state(const Field& state, std::size_t node) {
    const auto n = state.grid().node_count();
    std::vector<double> b(static_cast<std::size_t>(state.components()));
    for (int c = 0; c < state.components(); ++c) {
        b[static_cast<std::size_t>(c)] = state.values()[static_cast<Eigen::Index>(c * n + node)];
    }
    return b;
}

void check_state(const ModelSpec& model, const Field& state) {
    if (state.components() != model.components) {
        throw InvalidInput("state component count does not match model");
    }
}

}  // namespace

ScalarFlux truncated_burgers_flux(double u_max, Point direction) {
    if (!(u_max > 0.0)) throw InvalidInput("truncation level u_max must be > 0");
    ScalarFlux f;
    f.profile = [u_max](double u) {
        const double a = std::abs(u);
        return a <= u_max ? 0.5 * u * u : u_max * a - 0.5 * u_max * u_max;
    };
    f.slope = [u_max](double u) { return std::abs(u) <= u_max ? u : std::copysign(u_max, u); };
    f.direction = direction;
    f.lipschitz = u_max;
    return f;
}

void ModelSpec::validate() const {
    if (lambda != 0 && lambda != 1) throw InvalidInput("lambda must be 0 or 1");
    if (components < 1) throw InvalidInput("model needs at least one component");
    if (scalar_flux && components != 1) throw InvalidInput("scalar flux requires one component");
    if (reaction && !(reaction->value && reaction->jacobian)) {
        throw InvalidInput("reaction map is incomplete");
    }
    if (flux && !(flux->value && flux->jacobian)) throw InvalidInput("flux map is incomplete");
    if (scalar_flux && !(scalar_flux->profile && scalar_flux->slope)) {
        throw InvalidInput("scalar flux is incomplete");
    }
}

ModelSpec make_heat_model(double q, double a, double eps, int lambda) {
    ModelSpec m;
    m.name = "heat";
    m.density = convex::PowerDensity(a, q, eps);
    m.lambda = lambda;
    m.validate();
    return m;
}

ModelSpec make_burgers_model(double u_max, double q, double a, double eps, int dimension) {
    ModelSpec m = make_heat_model(q, a, eps, 1);
    m.name = "burgers";
    const Point dir = dimension == 1 ? Point{1.0, 0.0} : Point{1.0, 1.0};
    m.scalar_flux = truncated_burgers_flux(u_max, dir);
    m.validate();
    return m;
}

ModelSpec make_divergence_model(const DivergenceFormParams& p) {
    ModelSpec m = make_heat_model(p.q, p.a, p.eps, 1);
    m.name = "divform";
    m.components = p.components;
    const int k = p.components;
    const int dim = p.dimension;
    const double pi = std::numbers::pi;

    ReactionMap reaction;
    reaction.value = [p, k, dim, pi](const double* b, const Point& x, double t, double* out) {
        const double shape =
            std::sin(pi * x[0]) * (dim == 2 ? std::sin(pi * x[1]) : 1.0) * std::cos(pi * t);
        for (int i = 0; i < k; ++i) {
            double v = -p.damping * b[i] + p.source * shape;
            if (k > 1) v += p.coupling * (b[(i + 1) % k] - b[(i + k - 1) % k]);
            out[i] = v;
        }
    };
    reaction.jacobian = [p, k](const double*, const Point&, double, double* jac) {
        for (int i = 0; i < k * k; ++i) jac[i] = 0.0;
        for (int i = 0; i < k; ++i) {
            jac[i * k + i] += -p.damping;
            if (k > 1) {
                jac[i * k + (i + 1) % k] += p.coupling;
                jac[i * k + (i + k - 1) % k] -= p.coupling;
            }
        }
    };
    reaction.lipschitz = std::abs(p.damping) + (k > 1 ? 2.0 * std::abs(p.coupling) : 0.0);
    reaction.zero_bound = std::abs(p.source) * std::sqrt(static_cast<double>(k));
    m.reaction = reaction;

    FluxMap flux;
    flux.value = [p, k, dim, pi](const double* b, const Point&, double t, double* out) {
        const double mod = 1.0 + 0.5 * std::sin(2.0 * pi * t);
        for (int c = 0; c < k; ++c) {
            for (int axis = 0; axis < dim; ++axis) out[c * dim + axis] = p.advection * std::sin(b[c]) * mod;
        }
    };
    flux.jacobian = [p, k, dim, pi](const double* b, const Point&, double t, double* jac) {
        const double mod = 1.0 + 0.5 * std::sin(2.0 * pi * t);
        for (int i = 0; i < k * dim * k; ++i) jac[i] = 0.0;
        for (int c = 0; c < k; ++c) {
            for (int axis = 0; axis < dim; ++axis) {
                jac[(c * dim + axis) * k + c] = p.advection * std::cos(b[c]) * mod;
            }
        }
    };
    flux.lipschitz = 1.5 * std::abs(p.advection) * std::sqrt(static_cast<double>(dim));
    flux.zero_bound = 0.0;
    m.flux = flux;
    m.validate();
    return m;
}

ModelSpec make_adversarial_model(double kappa, double declared_mu_bar) {
    ModelSpec m = make_heat_model();
    m.name = "adversarial";
    ReactionMap reaction;
    reaction.value = [kappa](const double* b, const Point&, double, double* out) { out[0] = kappa * b[0]; };
    reaction.jacobian = [kappa](const double*, const Point&, double, double* jac) { jac[0] = kappa; };
    reaction.lipschitz = std::abs(kappa);
    m.reaction = reaction;
    m.declared.mu_bar = declared_mu_bar;
    m.validate();
    return m;
}

Field apply_lambda(const ModelSpec& model, const Field& state, double t) {
    check_state(model, state);
    const SpaceGrid& grid = state.grid();
    const int k = model.components;
    const int dim = grid.dimension();
    const auto n = grid.node_count();
    const double vol = grid.cell_volume();
    const double inv_h = 1.0 / grid.spacing();
    Field out(grid, k);
    if (!model.has_lambda()) return out;
    auto& y = out.values();

    if (model.reaction) {
        std::vector<double> theta(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = nodal_state(state, i);
            model.reaction->value(b.data(), grid.node_position(i), t, theta.data());
            require_finite(theta.data(), k, i, t, "reaction");
            for (int c = 0; c < k; ++c) y[static_cast<Eigen::Index>(c * n + i)] -= vol * theta[static_cast<std::size_t>(c)];
        }
    }

    if (model.flux || model.scalar_flux) {
        const auto kd = static_cast<std::size_t>(k * dim);
        std::vector<double> nodal(n * kd);
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = nodal_state(state, i);
            node_flux(model, dim, b.data(), grid.node_position(i), t, &nodal[i * kd]);
            require_finite(&nodal[i * kd], static_cast<int>(kd), i, t, "flux");
        }
        const std::vector<double> zero(static_cast<std::size_t>(k), 0.0);
        for (const Edge& edge : disc::grid_edges(grid)) {
            const double* lo = nullptr;
            const double* hi = nullptr;
            std::vector<double> lo_buf;
            std::vector<double> hi_buf;
            if (edge.lo >= 0) {
                lo = &nodal[static_cast<std::size_t>(edge.lo) * kd];
            } else {
                lo_buf.resize(kd);
                node_flux(model, dim, zero.data(), edge.lo_position, t, lo_buf.data());
                lo = lo_buf.data();
            }
            if (edge.hi >= 0) {
                hi = &nodal[static_cast<std::size_t>(edge.hi) * kd];
            } else {
                hi_buf.resize(kd);
                node_flux(model, dim, zero.data(), edge.hi_position, t, hi_buf.data());
                hi = hi_buf.data();
            }
            for (int c = 0; c < k; ++c) {
                const auto idx = static_cast<std::size_t>(c * dim + edge.axis);
                const double avg = 0.5 * (lo[idx] + hi[idx]) * vol * inv_h;
                if (edge.hi >= 0) y[static_cast<Eigen::Index>(c * n + static_cast<std::size_t>(edge.hi))] += avg;
                if (edge.lo >= 0) y[static_cast<Eigen::Index>(c * n + static_cast<std::size_t>(edge.lo))] -= avg;
            }
        }
    }
    return out;
}

Eigen::SparseMatrix<double> lambda_jacobian(const ModelSpec& model, const Field& state, double t) {
    check_state(model, state);
    const SpaceGrid& grid = state.grid();
    const int k = model.components;
    const int dim = grid.dimension();
    const auto n = grid.node_count();
    const auto rows = static_cast<Eigen::Index>(k * n);
    const double vol = grid.cell_volume();
    const double inv_h = 1.0 / grid.spacing();
    std::vector<Eigen::Triplet<double>> triplets;

    if (model.reaction) {
        std::vector<double> jac(static_cast<std::size_t>(k * k));
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = nodal_state(state, i);
            model.reaction->jacobian(b.data(), grid.node_position(i), t, jac.data());
            require_finite(jac.data(), k * k, i, t, "reaction derivative");
            for (int r = 0; r < k; ++r) {
                for (int c = 0; c < k; ++c) {
                    const double v = jac[static_cast<std::size_t>(r * k + c)];
                    if (v != 0.0) {
                        triplets.emplace_back(static_cast<Eigen::Index>(r * n + i),
                                              static_cast<Eigen::Index>(c * n + i), -vol * v);
                    }
                }
            }
        }
    }

    if (model.flux || model.scalar_flux) {
        const auto kdk = static_cast<std::size_t>(k * dim * k);
        std::vector<double> nodal(n * kdk);
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = nodal_state(state, i);
            node_flux_jacobian(model, dim, b.data(), grid.node_position(i), t, &nodal[i * kdk]);
            require_finite(&nodal[i * kdk], static_cast<int>(kdk), i, t, "flux derivative");
        }
        // Row test node r, column unknown j: contribution of edge e is
        // G_{e,r} * (1/2) dX_{axis(e)}(u_j)/dB with j an interior endpoint of e.
        for (const Edge& edge : disc::grid_edges(grid)) {
            const long ends[2] = {edge.lo, edge.hi};
            const double signs[2] = {-inv_h, inv_h};
            for (int re = 0; re < 2; ++re) {
                if (ends[re] < 0) continue;
                const auto r = static_cast<std::size_t>(ends[re]);
                for (int je = 0; je < 2; ++je) {
                    if (ends[je] < 0) continue;
                    const auto j = static_cast<std::size_t>(ends[je]);
                    const double* jac = &nodal[j * kdk];
                    for (int c = 0; c < k; ++c) {
                        for (int cj = 0; cj < k; ++cj) {
                            const double v = jac[static_cast<std::size_t>((c * dim + edge.axis) * k + cj)];
                            if (v == 0.0) continue;
                            triplets.emplace_back(static_cast<Eigen::Index>(c * n + r),
                                                  static_cast<Eigen::Index>(cj * n + j),
                                                  vol * signs[re] * 0.5 * v);
                        }
                    }
                }
            }
        }
    }

    Eigen::SparseMatrix<double> jac(rows, rows);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    return jac;
}

Field lambda_directional(const ModelSpec& model, const Field& state, double t,
                         const Field& direction) {
    check_state(model, state);
    const SpaceGrid& grid = state.grid();
    const int k = model.components;
    const int dim = grid.dimension();
    const auto n = grid.node_count();
    const double vol = grid.cell_volume();
    const double inv_h = 1.0 / grid.spacing();
    Field out(grid, k);
    if (!model.has_lambda()) return out;
    auto& y = out.values();

    if (model.reaction) {
        std::vector<double> jac(static_cast<std::size_t>(k * k));
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = nodal_state(state, i);
            const auto d = nodal_state(direction, i);
            model.reaction->jacobian(b.data(), grid.node_position(i), t, jac.data());
            for (int r = 0; r < k; ++r) {
                double v = 0.0;
                for (int c = 0; c < k; ++c) v += jac[static_cast<std::size_t>(r * k + c)] * d[static_cast<std::size_t>(c)];
                y[static_cast<Eigen::Index>(r * n + i)] -= vol * v;
            }
        }
    }

    if (model.flux || model.scalar_flux) {
        const auto kd = static_cast<std::size_t>(k * dim);
        // Tangent of the nodal flux values; boundary nodes have zero tangent.
        std::vector<double> tangent(n * kd, 0.0);
        std::vector<double> jac(kd * static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < n; ++i) {
            const auto b = nodal_state(state, i);
            const auto d = nodal_state(direction, i);
            node_flux_jacobian(model, dim, b.data(), grid.node_position(i), t, jac.data());
            for (std::size_t row = 0; row < kd; ++row) {
                double v = 0.0;
                for (int c = 0; c < k; ++c) v += jac[row * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] * d[static_cast<std::size_t>(c)];
                tangent[i * kd + row] = v;
            }
        }
        for (const Edge& edge : disc::grid_edges(grid)) {
            for (int c = 0; c < k; ++c) {
                const auto idx = static_cast<std::size_t>(c * dim + edge.axis);
                const double lo = edge.lo >= 0 ? tangent[static_cast<std::size_t>(edge.lo) * kd + idx] : 0.0;
                const double hi = edge.hi >= 0 ? tangent[static_cast<std::size_t>(edge.hi) * kd + idx] : 0.0;
                const double avg = 0.5 * (lo + hi) * vol * inv_h;
                if (edge.hi >= 0) y[static_cast<Eigen::Index>(c * n + static_cast<std::size_t>(edge.hi))] += avg;
                if (edge.lo >= 0) y[static_cast<Eigen::Index>(c * n + static_cast<std::size_t>(edge.lo))] -= avg;
            }
        }
    }
    return out;
}

double dual_norm(const Field& y, double q) {
    const double vol = y.grid().cell_volume();
    const Field scaled(y.grid(), y.components(), y.values() / vol);
    const Field r = disc::poisson_solve(scaled);  // laplacian(r) = y/h^d, i.e. G^T G (-r) = y/h^d
    const disc::EdgeField g = disc::discrete_gradient(r);
    return disc::edge_lq_norm(y.grid(), y.components(), g.values, q / (q - 1.0));
}

}  // namespace ben::models
