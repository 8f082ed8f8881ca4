#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "ben/cli.hpp"

namespace ben::cli {
namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
        throw ConfigError(key, "expected a finite number, got '" + v + "'");
    }
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size()) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    return x;
}

int to_int(const std::string& key, const std::string& v) {
    const long x = to_long(key, v);
    if (x < -1000000000L || x > 1000000000L) throw ConfigError(key, "integer out of range");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"model.name", [](RunConfig& c, const std::string&, const std::string& v) { c.model = v; }},
        {"model.q", [](RunConfig& c, const std::string& k, const std::string& v) { c.q = to_double(k, v); }},
        {"model.a", [](RunConfig& c, const std::string& k, const std::string& v) { c.a = to_double(k, v); }},
        {"model.eps", [](RunConfig& c, const std::string& k, const std::string& v) { c.eps = to_double(k, v); }},
        {"model.lambda", [](RunConfig& c, const std::string& k, const std::string& v) { c.lambda = to_int(k, v); }},
        {"model.u_max", [](RunConfig& c, const std::string& k, const std::string& v) { c.u_max = to_double(k, v); }},
        {"model.kappa", [](RunConfig& c, const std::string& k, const std::string& v) { c.kappa = to_double(k, v); }},
        {"model.mu_bar", [](RunConfig& c, const std::string& k, const std::string& v) { c.mu_bar = to_double(k, v); }},
        {"model.components", [](RunConfig& c, const std::string& k, const std::string& v) { c.components = to_int(k, v); }},
        {"model.damping", [](RunConfig& c, const std::string& k, const std::string& v) { c.damping = to_double(k, v); }},
        {"model.coupling", [](RunConfig& c, const std::string& k, const std::string& v) { c.coupling = to_double(k, v); }},
        {"model.advection", [](RunConfig& c, const std::string& k, const std::string& v) { c.advection = to_double(k, v); }},
        {"model.source", [](RunConfig& c, const std::string& k, const std::string& v) { c.source = to_double(k, v); }},
        {"grid.dim", [](RunConfig& c, const std::string& k, const std::string& v) { c.dim = to_int(k, v); }},
        {"grid.N", [](RunConfig& c, const std::string& k, const std::string& v) { c.nodes = to_int(k, v); }},
        {"time.T", [](RunConfig& c, const std::string& k, const std::string& v) { c.t_end = to_double(k, v); }},
        {"time.M", [](RunConfig& c, const std::string& k, const std::string& v) { c.intervals = to_int(k, v); }},
        {"initial.profile", [](RunConfig& c, const std::string&, const std::string& v) { c.profile = v; }},
        {"initial.path", [](RunConfig& c, const std::string&, const std::string& v) { c.initial_path = v; }},
        {"solve.max_iters", [](RunConfig& c, const std::string& k, const std::string& v) { c.solve.max_iters = to_int(k, v); }},
        {"solve.grad_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.solve.grad_tol = to_double(k, v); }},
        {"solve.energy_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.solve.energy_tol = to_double(k, v); }},
        {"solve.lbfgs", [](RunConfig& c, const std::string& k, const std::string& v) { c.solve.use_lbfgs = to_bool(k, v); }},
        {"solve.memory", [](RunConfig& c, const std::string& k, const std::string& v) { c.solve.memory = to_int(k, v); }},
        {"solve.seed", [](RunConfig& c, const std::string& k, const std::string& v) {
             const long s = to_long(k, v);
             if (s < 0) throw ConfigError(k, "seed must be >= 0");
             c.solve.seed = static_cast<std::uint64_t>(s);
         }},
        {"solve.init", [](RunConfig& c, const std::string& k, const std::string& v) {
             if (v == "constant") c.solve.init = solver::InitKind::constant;
             else if (v == "random") c.solve.init = solver::InitKind::random;
             else throw ConfigError(k, "expected constant or random, got '" + v + "'");
         }},
        {"solve.init_noise", [](RunConfig& c, const std::string& k, const std::string& v) { c.solve.init_noise = to_double(k, v); }},
        {"solve.certificate_tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.certificate_tol = to_double(k, v); }},
        {"solve.compare_baseline", [](RunConfig& c, const std::string& k, const std::string& v) { c.compare_baseline = to_bool(k, v); }},
        {"verify.samples", [](RunConfig& c, const std::string& k, const std::string& v) {
             const long s = to_long(k, v);
             if (s < 1) throw ConfigError(k, "must be >= 1");
             c.sampler.samples = static_cast<std::size_t>(s);
         }},
        {"verify.seed", [](RunConfig& c, const std::string& k, const std::string& v) {
             const long s = to_long(k, v);
             if (s < 0) throw ConfigError(k, "seed must be >= 0");
             c.sampler.seed = static_cast<std::uint64_t>(s);
         }},
        {"verify.amplitude", [](RunConfig& c, const std::string& k, const std::string& v) { c.sampler.amplitude = to_double(k, v); }},
        {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
    };
    return table;
}

void validate(RunConfig& c, const std::filesystem::path& base_dir) {
    static const char* names[] = {"heat", "burgers", "divform", "adversarial", "trivial"};
    bool known = false;
    for (const char* n : names) known = known || c.model == n;
    if (!known) throw ConfigError("model.name", "unknown model '" + c.model + "'");
    if (!(c.q >= 2.0)) throw ConfigError("model.q", "must be >= 2");
    if (!(c.a > 0.0)) throw ConfigError("model.a", "must be > 0");
    if (!(c.eps >= 0.0)) throw ConfigError("model.eps", "must be >= 0");
    if (c.lambda != 0 && c.lambda != 1) throw ConfigError("model.lambda", "must be 0 or 1");
    if (!(c.u_max > 0.0)) throw ConfigError("model.u_max", "must be > 0");
    if (c.components < 1) throw ConfigError("model.components", "must be >= 1");
    if (c.components != 1 && c.model != "divform") {
        throw ConfigError("model.components", "only the divform model has several components");
    }
    if (c.dim != 1 && c.dim != 2) throw ConfigError("grid.dim", "must be 1 or 2");
    if (c.nodes < 1) throw ConfigError("grid.N", "must be >= 1");
    if (!(c.t_end > 0.0)) throw ConfigError("time.T", "must be > 0");
    if (c.intervals < 1) throw ConfigError("time.M", "must be >= 1");
    if (c.profile != "sin" && c.profile != "bump" && c.profile != "zero" && c.profile != "csv") {
        throw ConfigError("initial.profile", "expected sin, bump, zero or csv");
    }
    if (c.profile == "csv") {
        if (c.initial_path.empty()) throw ConfigError("initial.path", "required for the csv profile");
        if (c.initial_path.is_relative()) c.initial_path = base_dir / c.initial_path;
        if (!std::filesystem::exists(c.initial_path)) {
            throw ConfigError("initial.path", "file not found: " + c.initial_path.string());
        }
    }
    if (c.solve.max_iters < 0) throw ConfigError("solve.max_iters", "must be >= 0");
    if (!(c.solve.grad_tol > 0.0)) throw ConfigError("solve.grad_tol", "must be > 0");
    if (!(c.solve.energy_tol > 0.0)) throw ConfigError("solve.energy_tol", "must be > 0");
    if (c.solve.memory < 1) throw ConfigError("solve.memory", "must be >= 1");
    if (!(c.solve.init_noise >= 0.0)) throw ConfigError("solve.init_noise", "must be >= 0");
    if (!(c.certificate_tol > 0.0)) throw ConfigError("solve.certificate_tol", "must be > 0");
    if (!(c.sampler.amplitude > 0.0)) throw ConfigError("verify.amplitude", "must be > 0");
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    RunConfig cfg;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no), "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no), "expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.find('.') == std::string::npos && !section.empty()) key = section + "." + key;
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(key, "unknown key");
        it->second(cfg, key, value);
    }
    validate(cfg, base_dir);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

models::ModelSpec build_model(const RunConfig& c) {
    models::ModelSpec m;
    if (c.model == "heat" || c.model == "trivial") {
        m = models::make_heat_model(c.q, c.a, c.eps, c.lambda);
        m.name = c.model;
    } else if (c.model == "burgers") {
        m = models::make_burgers_model(c.u_max, c.q, c.a, c.eps, c.dim);
        m.lambda = c.lambda;
    } else if (c.model == "divform") {
        models::DivergenceFormParams p;
        p.q = c.q;
        p.a = c.a;
        p.eps = c.eps;
        p.components = c.components;
        p.dimension = c.dim;
        p.damping = c.damping;
        p.coupling = c.coupling;
        p.advection = c.advection;
        p.source = c.source;
        m = models::make_divergence_model(p);
        m.lambda = c.lambda;
    } else {
        m = models::make_adversarial_model(c.kappa, c.mu_bar.value_or(1.0));
        m.density = convex::PowerDensity(c.a, c.q, c.eps);
        m.lambda = c.lambda;
    }
    if (c.mu_bar && c.model != "adversarial") m.declared.mu_bar = c.mu_bar;
    return m;
}

disc::SpaceGrid build_grid(const RunConfig& c) { return disc::SpaceGrid(c.dim, c.nodes); }

disc::Field initial_field(const RunConfig& c) {
    const disc::SpaceGrid grid = build_grid(c);
    const auto n = grid.node_count();
    const double pi = std::numbers::pi;
    disc::Field w0(grid, c.components);
    if (c.profile == "zero" || c.model == "trivial") return w0;
    if (c.profile == "csv") {
        std::ifstream in(c.initial_path);
        if (!in) throw IoError("cannot open " + c.initial_path.string());
        std::vector<double> values;
        std::string line;
        while (std::getline(in, line)) {
            std::stringstream row(line);
            std::string cell;
            while (std::getline(row, cell, ',')) {
                cell = trim(cell);
                if (cell.empty()) continue;
                char* end = nullptr;
                const double v = std::strtod(cell.c_str(), &end);
                if (end != cell.c_str() + cell.size()) {
                    if (values.empty()) break;  // header row
                    throw IoError("bad number '" + cell + "' in " + c.initial_path.string());
                }
                values.push_back(v);
            }
        }
        if (values.size() != static_cast<std::size_t>(c.components) * n) {
            throw IoError(c.initial_path.string() + ": expected " +
                          std::to_string(static_cast<std::size_t>(c.components) * n) + " values, got " +
                          std::to_string(values.size()));
        }
        return disc::Field(grid, c.components, Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    for (int comp = 0; comp < c.components; ++comp) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = grid.node_position(i);
            double v = 0.0;
            if (c.profile == "sin") {
                v = std::sin(pi * p[0]) * (c.dim == 2 ? std::sin(pi * p[1]) : 1.0);
            } else {
                double r2 = (p[0] - 0.5) * (p[0] - 0.5);
                if (c.dim == 2) r2 += (p[1] - 0.5) * (p[1] - 0.5);
                const double s = r2 / 0.0625;  // radius 1/4
                v = s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
            }
            w0.values()[static_cast<Eigen::Index>(comp * n + i)] = v;
        }
    }
    return w0;
}

}  // namespace ben::cli
