#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ben/discretization.hpp"
#include "ben/errors.hpp"

namespace ben::disc {
namespace {

void put_number(std::ostream& out, double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const auto dofs = static_cast<Eigen::Index>(traj.dofs_per_state());
    out << 't';
    for (Eigen::Index i = 0; i < dofs; ++i) out << ",node_" << i;
    out << '\n';
    for (int k = 0; k <= traj.intervals(); ++k) {
        put_number(out, traj.times()[static_cast<std::size_t>(k)]);
        const auto col = traj.column(k);
        for (Eigen::Index i = 0; i < dofs; ++i) {
            out << ',';
            put_number(out, col[i]);
        }
        out << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_trajectory_csv(out, traj);
    if (!out) throw IoError("write to " + path + " failed");
}

Trajectory read_trajectory_csv(std::istream& in, const SpaceGrid& grid, int components) {
    const auto dofs = static_cast<std::size_t>(components) * grid.node_count();
    std::string line;
    if (!std::getline(in, line)) throw IoError("trajectory CSV is empty");
    {
        std::istringstream header(line);
        std::string cell;
        std::size_t columns = 0;
        while (std::getline(header, cell, ',')) {
            const std::string expected = columns == 0 ? "t" : "node_" + std::to_string(columns - 1);
            if (cell != expected) throw IoError("unexpected CSV header cell '" + cell + "'");
            ++columns;
        }
        if (columns != dofs + 1) {
            throw IoError("CSV has " + std::to_string(columns) + " columns, expected " +
                          std::to_string(dofs + 1));
        }
    }

    std::vector<double> times;
    std::vector<double> flat;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::size_t count = 0;
        const char* p = line.c_str();
        while (true) {
            char* end = nullptr;
            const double v = std::strtod(p, &end);
            if (end == p) throw IoError("malformed number on CSV row " + std::to_string(row));
            if (count == 0) {
                times.push_back(v);
            } else {
                flat.push_back(v);
            }
            ++count;
            if (*end == ',') {
                p = end + 1;
            } else if (*end == '\0' || *end == '\r') {
                break;
            } else {
                throw IoError("unexpected character on CSV row " + std::to_string(row));
            }
        }
        if (count != dofs + 1) throw IoError("wrong column count on CSV row " + std::to_string(row));
    }

    const auto cols = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd states(static_cast<Eigen::Index>(dofs), cols);
    for (Eigen::Index k = 0; k < cols; ++k) {
        for (std::size_t i = 0; i < dofs; ++i) {
            states(static_cast<Eigen::Index>(i), k) = flat[static_cast<std::size_t>(k) * dofs + i];
        }
    }
    return Trajectory(grid, components, std::move(times), std::move(states), true);
}

Trajectory read_trajectory_csv(const std::string& path, const SpaceGrid& grid, int components) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return read_trajectory_csv(in, grid, components);
}

}  // namespace ben::disc
