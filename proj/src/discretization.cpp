#include "ben/discretization.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "ben/errors.hpp"

namespace ben::disc {

SpaceGrid::SpaceGrid(int dimension, int interior_nodes) : dim_(dimension), n_(interior_nodes) {
    if (dim_ != 1 && dim_ != 2) throw InvalidInput("grid dimension must be 1 or 2");
    if (n_ < 1) throw InvalidInput("grid needs at least one interior node");
}

double SpaceGrid::cell_volume() const noexcept {
    const double h = spacing();
    return dim_ == 1 ? h : h * h;
}

std::size_t SpaceGrid::node_count() const noexcept {
    const auto n = static_cast<std::size_t>(n_);
    return dim_ == 1 ? n : n * n;
}

std::size_t SpaceGrid::edge_count() const noexcept {
    const auto n = static_cast<std::size_t>(n_);
    return dim_ == 1 ? n + 1 : 2 * n * (n + 1);
}

std::array<double, 2> SpaceGrid::node_position(std::size_t node) const {
    const double h = spacing();
    if (dim_ == 1) return {(static_cast<double>(node) + 1.0) * h, 0.0};
    const auto n = static_cast<std::size_t>(n_);
    return {(static_cast<double>(node % n) + 1.0) * h, (static_cast<double>(node / n) + 1.0) * h};
}

std::vector<Edge> grid_edges(const SpaceGrid& grid) {
    const int n = grid.interior_nodes();
    const double h = grid.spacing();
    std::vector<Edge> edges;
    edges.reserve(grid.edge_count());
    if (grid.dimension() == 1) {
        for (int e = 0; e <= n; ++e) {
            Edge edge;
            edge.lo = e == 0 ? -1 : e - 1;
            edge.hi = e == n ? -1 : e;
            edge.lo_position = {e * h, 0.0};
            edge.hi_position = {(e + 1) * h, 0.0};
            edges.push_back(edge);
        }
        return edges;
    }
    auto node = [n](int i, int j) { return static_cast<long>(i) + static_cast<long>(n) * j; };
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= n; ++i) {
            Edge edge;
            edge.axis = 0;
            edge.lo = i == 0 ? -1 : node(i - 1, j);
            edge.hi = i == n ? -1 : node(i, j);
            edge.lo_position = {i * h, (j + 1) * h};
            edge.hi_position = {(i + 1) * h, (j + 1) * h};
            edges.push_back(edge);
        }
    }
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i < n; ++i) {
            Edge edge;
            edge.axis = 1;
            edge.lo = j == 0 ? -1 : node(i, j - 1);
            edge.hi = j == n ? -1 : node(i, j);
            edge.lo_position = {(i + 1) * h, j * h};
            edge.hi_position = {(i + 1) * h, (j + 1) * h};
            edges.push_back(edge);
        }
    }
    return edges;
}

Field::Field(SpaceGrid grid, int components)
    : grid_(grid), k_(components),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(components * grid.node_count()))) {
    if (k_ < 1) throw InvalidInput("field needs at least one component");
}

Field::Field(SpaceGrid grid, int components, Eigen::VectorXd values)
    : grid_(grid), k_(components), values_(std::move(values)) {
    if (k_ < 1) throw InvalidInput("field needs at least one component");
    if (values_.size() != static_cast<Eigen::Index>(k_ * grid_.node_count())) {
        throw InvalidInput("field length does not match grid and component count");
    }
    if (!values_.allFinite()) throw InvalidInput("field has non-finite entries");
}

EdgeField discrete_gradient(const Field& field) {
    const SpaceGrid& grid = field.grid();
    const auto edges = grid_edges(grid);
    const auto n = static_cast<Eigen::Index>(grid.node_count());
    const auto m = static_cast<Eigen::Index>(edges.size());
    const double inv_h = 1.0 / grid.spacing();
    EdgeField out{grid, field.components(), Eigen::VectorXd::Zero(field.components() * m)};
    for (int c = 0; c < field.components(); ++c) {
        const auto u = field.values().segment(c * n, n);
        for (Eigen::Index e = 0; e < m; ++e) {
            const Edge& edge = edges[static_cast<std::size_t>(e)];
            const double hi = edge.hi >= 0 ? u[edge.hi] : 0.0;
            const double lo = edge.lo >= 0 ? u[edge.lo] : 0.0;
            out.values[c * m + e] = (hi - lo) * inv_h;
        }
    }
    return out;
}

Field discrete_divergence(const EdgeField& edge_field) {
    const SpaceGrid& grid = edge_field.grid;
    const auto edges = grid_edges(grid);
    const auto n = static_cast<Eigen::Index>(grid.node_count());
    const auto m = static_cast<Eigen::Index>(edges.size());
    if (edge_field.values.size() != edge_field.components * m) {
        throw InvalidInput("edge field length does not match grid");
    }
    const double inv_h = 1.0 / grid.spacing();
    Field out(grid, edge_field.components);
    for (int c = 0; c < edge_field.components; ++c) {
        auto div = out.values().segment(c * n, n);
        for (Eigen::Index e = 0; e < m; ++e) {
            const Edge& edge = edges[static_cast<std::size_t>(e)];
            const double g = edge_field.values[c * m + e] * inv_h;
            if (edge.lo >= 0) div[edge.lo] += g;
            if (edge.hi >= 0) div[edge.hi] -= g;
        }
    }
    return out;
}

Field laplacian(const Field& field) {
    const SpaceGrid& grid = field.grid();
    const int n = grid.interior_nodes();
    const auto nodes = static_cast<Eigen::Index>(grid.node_count());
    const double h = grid.spacing();
    const double inv_h2 = 1.0 / (h * h);
    Field out(grid, field.components());
    for (int c = 0; c < field.components(); ++c) {
        const auto u = field.values().segment(c * nodes, nodes);
        auto lap = out.values().segment(c * nodes, nodes);
        if (grid.dimension() == 1) {
            for (int i = 0; i < n; ++i) {
                const double left = i > 0 ? u[i - 1] : 0.0;
                const double right = i + 1 < n ? u[i + 1] : 0.0;
                lap[i] = (left - 2.0 * u[i] + right) * inv_h2;
            }
        } else {
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    const Eigen::Index id = i + n * j;
                    const double w = i > 0 ? u[id - 1] : 0.0;
                    const double e = i + 1 < n ? u[id + 1] : 0.0;
                    const double s = j > 0 ? u[id - n] : 0.0;
                    const double nn = j + 1 < n ? u[id + n] : 0.0;
                    lap[id] = (w + e + s + nn - 4.0 * u[id]) * inv_h2;
                }
            }
        }
    }
    return out;
}

Field poisson_solve(const Field& rhs) {
    const SpaceGrid& grid = rhs.grid();
    if (!rhs.values().allFinite()) throw InvalidInput("poisson right-hand side is not finite");
    const auto nodes = static_cast<Eigen::Index>(grid.node_count());
    const double h = grid.spacing();
    Field out(grid, rhs.components());

    if (grid.dimension() == 1) {
        // Thomas algorithm on (u_{i-1} - 2u_i + u_{i+1}) = h^2 f_i.
        std::vector<double> c_prime(static_cast<std::size_t>(nodes));
        std::vector<double> d_prime(static_cast<std::size_t>(nodes));
        for (int c = 0; c < rhs.components(); ++c) {
            const auto f = rhs.values().segment(c * nodes, nodes);
            for (Eigen::Index i = 0; i < nodes; ++i) {
                const double sub = i > 0 ? 1.0 : 0.0;
                const double denom = -2.0 - sub * (i > 0 ? c_prime[i - 1] : 0.0);
                c_prime[i] = 1.0 / denom;
                d_prime[i] = (h * h * f[i] - sub * (i > 0 ? d_prime[i - 1] : 0.0)) / denom;
            }
            auto y = out.values().segment(c * nodes, nodes);
            for (Eigen::Index i = nodes - 1; i >= 0; --i) {
                y[i] = d_prime[i] - (i + 1 < nodes ? c_prime[i] * y[i + 1] : 0.0);
            }
        }
        return out;
    }

    const Eigen::SparseMatrix<double> g = gradient_matrix(grid, 1);
    const Eigen::SparseMatrix<double> stiffness = g.transpose() * g;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(stiffness);
    if (solver.info() != Eigen::Success) throw NumericalFailure("Dirichlet Laplacian factorization", 0.0);
    for (int c = 0; c < rhs.components(); ++c) {
        const Eigen::VectorXd f = -rhs.values().segment(c * nodes, nodes);
        out.values().segment(c * nodes, nodes) = solver.solve(f);
    }
    return out;
}

Eigen::SparseMatrix<double> gradient_matrix(const SpaceGrid& grid, int components) {
    const auto edges = grid_edges(grid);
    const auto n = static_cast<Eigen::Index>(grid.node_count());
    const auto m = static_cast<Eigen::Index>(edges.size());
    const double inv_h = 1.0 / grid.spacing();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(2 * components * m));
    for (int c = 0; c < components; ++c) {
        for (Eigen::Index e = 0; e < m; ++e) {
            const Edge& edge = edges[static_cast<std::size_t>(e)];
            if (edge.hi >= 0) triplets.emplace_back(c * m + e, c * n + edge.hi, inv_h);
            if (edge.lo >= 0) triplets.emplace_back(c * m + e, c * n + edge.lo, -inv_h);
        }
    }
    Eigen::SparseMatrix<double> g(components * m, components * n);
    g.setFromTriplets(triplets.begin(), triplets.end());
    return g;
}

double h_inner(const Field& a, const Field& b) {
    if (!(a.grid() == b.grid()) || a.components() != b.components()) {
        throw InvalidInput("h_inner: fields live on different spaces");
    }
    return a.grid().cell_volume() * a.values().dot(b.values());
}

double h_norm(const Field& a) { return std::sqrt(h_inner(a, a)); }

double edge_lq_norm(const SpaceGrid& grid, int components,
                    const Eigen::Ref<const Eigen::VectorXd>& edge_values, double q) {
    const auto m = static_cast<Eigen::Index>(grid.edge_count());
    double sum = 0.0;
    for (Eigen::Index e = 0; e < m; ++e) {
        double r2 = 0.0;
        for (int c = 0; c < components; ++c) r2 += edge_values[c * m + e] * edge_values[c * m + e];
        sum += q == 2.0 ? r2 : std::pow(r2, 0.5 * q);
    }
    return std::pow(grid.cell_volume() * sum, 1.0 / q);
}

double x_norm(const Field& field, double q) {
    const EdgeField g = discrete_gradient(field);
    return edge_lq_norm(field.grid(), field.components(), g.values, q);
}

Trajectory::Trajectory(const Field& initial, double t0, double t_end, int intervals)
    : grid_(initial.grid()), k_(initial.components()), locked_(true) {
    if (intervals < 1) throw InvalidInput("trajectory needs at least one time interval");
    if (!(std::isfinite(t0) && std::isfinite(t_end) && t_end > t0)) {
        throw InvalidInput("trajectory time interval must satisfy t0 < t_end");
    }
    const double tau = (t_end - t0) / intervals;
    times_.resize(static_cast<std::size_t>(intervals) + 1);
    for (int k = 0; k <= intervals; ++k) times_[static_cast<std::size_t>(k)] = t0 + k * tau;
    times_.back() = t_end;
    states_ = initial.values().replicate(1, intervals + 1);
}

Trajectory::Trajectory(SpaceGrid grid, int components, std::vector<double> times,
                       Eigen::MatrixXd states, bool initial_locked)
    : grid_(grid), k_(components), times_(std::move(times)), states_(std::move(states)),
      locked_(initial_locked) {
    if (times_.size() < 2) throw InvalidInput("trajectory needs at least two time nodes");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) throw InvalidInput("trajectory times must increase");
    }
    if (states_.cols() != static_cast<Eigen::Index>(times_.size()) ||
        states_.rows() != static_cast<Eigen::Index>(k_ * grid_.node_count())) {
        throw InvalidInput("trajectory state matrix has the wrong shape");
    }
    if (!states_.allFinite()) throw InvalidInput("trajectory has non-finite entries");
}

Field Trajectory::state(int k) const {
    if (k < 0 || k > intervals()) throw InvalidInput("state index out of range");
    return Field(grid_, k_, states_.col(k));
}

void Trajectory::set_state(int k, const Eigen::Ref<const Eigen::VectorXd>& values) {
    if (k < 0 || k > intervals()) throw InvalidInput("state index out of range");
    if (k == 0 && locked_) throw InvalidInput("initial state is locked");
    if (values.size() != states_.rows()) throw InvalidInput("state length mismatch");
    states_.col(k) = values;
}

Eigen::VectorXd Trajectory::free_values() const {
    const Eigen::Index rows = states_.rows();
    Eigen::VectorXd out(rows * intervals());
    for (int k = 1; k <= intervals(); ++k) out.segment((k - 1) * rows, rows) = states_.col(k);
    return out;
}

void Trajectory::set_free_values(const Eigen::Ref<const Eigen::VectorXd>& values) {
    const Eigen::Index rows = states_.rows();
    if (values.size() != rows * intervals()) throw InvalidInput("free value length mismatch");
    for (int k = 1; k <= intervals(); ++k) states_.col(k) = values.segment((k - 1) * rows, rows);
}

Field paired_time_derivative(const Trajectory& traj, int k) {
    if (k < 0 || k >= traj.intervals()) throw InvalidInput("interval index out of range");
    const double tau = traj.times()[static_cast<std::size_t>(k) + 1] - traj.times()[static_cast<std::size_t>(k)];
    return Field(traj.grid(), traj.components(), (traj.column(k + 1) - traj.column(k)) / tau);
}

double paired_energy_integral(const Trajectory& traj) {
    const double vol = traj.grid().cell_volume();
    double sum = 0.0;
    for (int k = 0; k < traj.intervals(); ++k) {
        const double tau =
            traj.times()[static_cast<std::size_t>(k) + 1] - traj.times()[static_cast<std::size_t>(k)];
        const Eigen::VectorXd mid = 0.5 * (traj.column(k + 1) + traj.column(k));
        const Eigen::VectorXd rate = (traj.column(k + 1) - traj.column(k)) / tau;
        sum += tau * vol * mid.dot(rate);
    }
    return sum;
}

}  // namespace ben::disc
