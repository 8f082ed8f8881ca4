#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ben::disc {

/// Uniform grid of N interior nodes per axis on the unit interval or
/// square, homogeneous Dirichlet boundary. Spacing h = 1/(N+1).
class SpaceGrid {
public:
    SpaceGrid(int dimension, int interior_nodes);

    int dimension() const noexcept { return dim_; }
    int interior_nodes() const noexcept { return n_; }
    double spacing() const noexcept { return 1.0 / static_cast<double>(n_ + 1); }
    /// h^d, the volume carried by a node or an edge.
    double cell_volume() const noexcept;
    std::size_t node_count() const noexcept;
    std::size_t edge_count() const noexcept;
    std::array<double, 2> node_position(std::size_t node) const;

    bool operator==(const SpaceGrid&) const = default;

private:
    int dim_;
    int n_;
};

/// One edge of the grid. Endpoints index interior nodes; -1 marks a
/// boundary node (value implicitly zero). Differences run lo -> hi.
struct Edge {
    int axis = 0;
    long lo = -1;
    long hi = -1;
    std::array<double, 2> lo_position{};
    std::array<double, 2> hi_position{};
};

std::vector<Edge> grid_edges(const SpaceGrid& grid);

/// Nodal field with k components, component-major: values[c * n + node].
class Field {
public:
    Field(SpaceGrid grid, int components);
    Field(SpaceGrid grid, int components, Eigen::VectorXd values);

    static Field zeros(SpaceGrid grid, int components) { return Field(grid, components); }

    const SpaceGrid& grid() const noexcept { return grid_; }
    int components() const noexcept { return k_; }
    const Eigen::VectorXd& values() const noexcept { return values_; }
    Eigen::VectorXd& values() noexcept { return values_; }
    double operator()(int component, std::size_t node) const {
        return values_[static_cast<Eigen::Index>(component * grid_.node_count() + node)];
    }

private:
    SpaceGrid grid_;
    int k_;
    Eigen::VectorXd values_;
};

/// Edge-valued field (one k-vector per edge), component-major.
struct EdgeField {
    SpaceGrid grid;
    int components;
    Eigen::VectorXd values;
};

/// Forward differences with Dirichlet zero extension.
EdgeField discrete_gradient(const Field& field);
/// Negative transpose of discrete_gradient, so that div(grad u) = laplacian(u).
Field discrete_divergence(const EdgeField& edges);
/// 3-point (1-D) / 5-point (2-D) Dirichlet Laplacian.
Field laplacian(const Field& field);
/// Solves laplacian(y) = rhs with Dirichlet boundary.
Field poisson_solve(const Field& rhs);

/// Sparse matrix of discrete_gradient, (k * edges) x (k * nodes).
Eigen::SparseMatrix<double> gradient_matrix(const SpaceGrid& grid, int components);

/// <T a, T b>_H = h^d a.b (also the pairing <a, I b>).
double h_inner(const Field& a, const Field& b);
double h_norm(const Field& a);
/// Discrete W^{1,q}_0 norm (sum_e h^d |grad u|_e^q)^(1/q).
double x_norm(const Field& field, double q);
/// Same norm for an edge array laid out as discrete_gradient's output.
double edge_lq_norm(const SpaceGrid& grid, int components,
                    const Eigen::Ref<const Eigen::VectorXd>& edge_values, double q);

/// Space-time trajectory on a uniform time grid t_k = t0 + k tau, k = 0..M.
/// State k is stored as column k of a (k * nodes) x (M + 1) matrix.
class Trajectory {
public:
    /// Constant-in-time extension of the initial datum; locks u_0.
    Trajectory(const Field& initial, double t0, double t_end, int intervals);

    /// Build from explicit times/states (used by CSV ingestion).
    Trajectory(SpaceGrid grid, int components, std::vector<double> times,
               Eigen::MatrixXd states, bool initial_locked);

    const SpaceGrid& grid() const noexcept { return grid_; }
    int components() const noexcept { return k_; }
    int intervals() const noexcept { return static_cast<int>(times_.size()) - 1; }
    double step() const noexcept { return (times_.back() - times_.front()) / intervals(); }
    const std::vector<double>& times() const noexcept { return times_; }
    double midpoint_time(int k) const { return 0.5 * (times_[k] + times_[k + 1]); }
    bool initial_locked() const noexcept { return locked_; }
    std::size_t dofs_per_state() const noexcept { return static_cast<std::size_t>(states_.rows()); }

    const Eigen::MatrixXd& states() const noexcept { return states_; }
    Eigen::Ref<const Eigen::VectorXd> column(int k) const { return states_.col(k); }
    Field state(int k) const;
    /// Throws InvalidInput when k == 0 and the initial datum is locked.
    void set_state(int k, const Eigen::Ref<const Eigen::VectorXd>& values);

    /// Unknowns u_1..u_M stacked into one vector.
    Eigen::VectorXd free_values() const;
    void set_free_values(const Eigen::Ref<const Eigen::VectorXd>& values);

private:
    SpaceGrid grid_;
    int k_;
    std::vector<double> times_;
    Eigen::MatrixXd states_;
    bool locked_;
};

/// (u_{k+1} - u_k) / tau, the slice value of dv/dt on (t_k, t_{k+1}).
Field paired_time_derivative(const Trajectory& traj, int k);

/// sum_k tau <(u_{k+1}+u_k)/2, (u_{k+1}-u_k)/tau>_H. Telescopes to
/// (|u_M|_H^2 - |u_0|_H^2) / 2.
double paired_energy_integral(const Trajectory& traj);

/// CSV with header t,node_0,...,node_{kN-1}; one row per time node, %.17g.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
/// Reads a trajectory written by write_trajectory_csv. Locks u_0.
Trajectory read_trajectory_csv(std::istream& in, const SpaceGrid& grid, int components);
Trajectory read_trajectory_csv(const std::string& path, const SpaceGrid& grid, int components);

}  // namespace ben::disc
