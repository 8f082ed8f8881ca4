#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "ben/discretization.hpp"
#include "ben/energy.hpp"
#include "ben/errors.hpp"
#include "ben/models.hpp"
#include "ben/solver.hpp"

namespace ben::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailed = 1,
    kExitConfig = 2,
    kExitSolve = 3,
    kExitIo = 4,
};

/// Invalid or unknown config entry; key() names it as written in the file.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& key, const std::string& what)
        : InvalidInput(key + ": " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

struct RunConfig {
    std::string model = "heat";  ///< heat, burgers, divform, adversarial, trivial
    double q = 2.0;
    double a = 1.0;
    double eps = 0.0;
    int lambda = 1;
    double u_max = 10.0;
    double kappa = 2000.0;
    std::optional<double> mu_bar;
    int components = 1;
    double damping = 1.0;
    double coupling = 0.5;
    double advection = 1.0;
    double source = 1.0;

    int dim = 1;
    int nodes = 33;
    double t_end = 0.1;
    int intervals = 64;

    std::string profile = "sin";  ///< sin, bump, zero, csv
    std::filesystem::path initial_path;

    solver::SolveOptions solve;
    double certificate_tol = 1e-6;
    bool compare_baseline = false;

    models::SamplerConfig sampler;

    std::filesystem::path output_dir = ".";
};

/// Parses `section.key = value` lines ('#' comments, optional [section]
/// headers prefixing bare keys). initial.path resolves against base_dir,
/// output.dir against the working directory.
/// Throws ConfigError.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

models::ModelSpec build_model(const RunConfig& cfg);
disc::SpaceGrid build_grid(const RunConfig& cfg);
/// Throws IoError for unreadable CSV profiles.
disc::Field initial_field(const RunConfig& cfg);

nlohmann::ordered_json to_json(const energy::EnergyReport& report);
nlohmann::ordered_json to_json(const models::ConditionReport& report);
/// Serializes with %.17g for floating point and null for non-finite values.
void write_json(std::ostream& out, const nlohmann::ordered_json& value, int indent = 2);

/// Commands. Each returns a process exit code; stdout receives a single
/// summary line and stderr the diagnostics.
int run_solve(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int run_baseline(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int run_verify(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int run_gradcheck(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

struct TableOptions {
    double q = 2.0;
    double a = 1.0;
    double eps = 0.0;
    double min = -2.0;
    double max = 2.0;
    int steps = 41;
    std::filesystem::path out = "conjugate_table.csv";
};
int run_conjugate_table(const TableOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace ben::cli
