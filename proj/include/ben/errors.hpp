#pragma once

#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace ben {

/// Non-finite or out-of-range argument.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method failed to reach its tolerance.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + format(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    static std::string format(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3e", v);
        return buf;
    }

    double residual_;
};

/// A model map returned a non-finite value.
class ModelEvaluationError : public std::runtime_error {
public:
    ModelEvaluationError(const std::string& what, std::size_t node, double t)
        : std::runtime_error(what + " at node " + std::to_string(node) + ", t=" +
                             std::to_string(t)),
          node_(node), time_(t) {}

    std::size_t node() const noexcept { return node_; }
    double time() const noexcept { return time_; }

private:
    std::size_t node_;
    double time_;
};

/// Implicit time step whose Newton iteration did not converge.
class StepFailure : public NumericalFailure {
public:
    StepFailure(int step, double residual)
        : NumericalFailure("implicit step " + std::to_string(step) + " failed", residual),
          step_(step) {}

    int step() const noexcept { return step_; }

private:
    int step_;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ben
