#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include "ben/cli.hpp"
#include "ben/convex_core.hpp"

namespace ben::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_json_file(const fs::path& path, const Json& value) {
    auto out = open_output(path);
    write_json(out, value);
    if (!out) throw IoError("write failed for " + path.string());
}

/// Maps exceptions onto exit codes and reports them on err.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const StepFailure& e) {
        err << "baseline failure at step " << e.step() << ": " << e.what() << '\n';
        return kExitSolve;
    } catch (const std::exception& e) {
        err << "solve failure: " << e.what() << '\n';
        return kExitSolve;
    }
}

void write_history(const fs::path& path, const std::vector<solver::HistoryEntry>& history) {
    auto out = open_output(path);
    out << "iter,J,grad_norm\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        out << i << ',' << num(history[i].energy) << ',' << num(history[i].grad_norm) << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

/// gnuplot table: time followed by a handful of evenly spread nodes of
/// the first component.
void write_profiles(const fs::path& path, const disc::Trajectory& traj) {
    const auto n = traj.grid().node_count();
    std::vector<std::size_t> nodes;
    for (std::size_t j = 1; j <= 5; ++j) {
        const std::size_t node = std::min(n - 1, j * n / 6);
        if (nodes.empty() || nodes.back() != node) nodes.push_back(node);
    }
    auto out = open_output(path);
    out << "# t";
    for (std::size_t node : nodes) {
        const auto p = traj.grid().node_position(node);
        out << " u(" << num(p[0]);
        if (traj.grid().dimension() == 2) out << ',' << num(p[1]);
        out << ')';
    }
    out << '\n';
    for (int k = 0; k <= traj.intervals(); ++k) {
        out << num(traj.times()[static_cast<std::size_t>(k)]);
        for (std::size_t node : nodes) out << ' ' << num(traj.column(k)[static_cast<Eigen::Index>(node)]);
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

bool uniform_convexity_applies(const models::ModelSpec& m) {
    return m.density.exponent() == 2.0 || m.density.regularizer() > 0.0;
}

}  // namespace

int run_solve(const fs::path& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_config(config);
        const models::ModelSpec model = build_model(cfg);
        const disc::Field w0 = initial_field(cfg);
        const disc::Trajectory init = solver::initial_trajectory(w0, cfg.t_end, cfg.intervals, cfg.solve);
        bool stagnated = false;
        solver::SolveOutcome result{init, {}, 0, false, 0.0, {}};
        try {
            result = solver::minimize(model, init, cfg.solve);
        } catch (const solver::Stagnation& e) {
            // Keep the last iterate; it may already certify.
            err << "solver stagnated: " << e.what() << '\n';
            stagnated = true;
            result.trajectory = e.last_iterate();
            result.history = e.history();
            result.iterations = e.iteration();
            result.grad_norm = e.residual();
            result.report = energy::eval_energy(model, result.trajectory);
        }
        const energy::Certificate cert = energy::certificate(result.report, cfg.certificate_tol);

        Json report = to_json(result.report);
        report["iterations"] = result.iterations;
        report["converged"] = result.converged;
        report["grad_norm"] = result.grad_norm;
        report["stagnated"] = stagnated;
        report["certificate"] = {{"solved", cert.solved}, {"tol", cert.tol}};
        std::string compare_note;
        if (cfg.compare_baseline) {
            const disc::Trajectory base = solver::implicit_baseline(model, w0, cfg.t_end, cfg.intervals);
            const solver::Comparison cmp = solver::compare(result.trajectory, base);
            report["compare_baseline"] = {{"relative_l2", cmp.relative_l2}, {"max_node", cmp.max_node}};
            compare_note = " baseline_rel=" + short_num(cmp.relative_l2);
        }

        ensure_dir(cfg.output_dir);
        disc::write_trajectory_csv((cfg.output_dir / "trajectory.csv").string(), result.trajectory);
        write_json_file(cfg.output_dir / "report.json", report);
        write_history(cfg.output_dir / "history.csv", result.history);
        write_profiles(cfg.output_dir / "profiles.dat", result.trajectory);

        err << "iterations " << result.iterations << (result.converged ? " (converged)" : " (not converged)")
            << ", J " << num(result.report.total) << ", gradient norm " << num(result.grad_norm) << '\n';
        out << "solve " << model.name << ": " << (cert.solved ? "solved" : "not solved")
            << " normalized=" << short_num(cert.normalized) << " defect=" << short_num(cert.defect_norm)
            << " iters=" << result.iterations << compare_note << '\n';
        if (cert.solved) return kExitOk;
        return stagnated ? kExitSolve : kExitFailed;
    });
}

int run_baseline(const fs::path& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_config(config);
        const models::ModelSpec model = build_model(cfg);
        const disc::Field w0 = initial_field(cfg);
        const disc::Trajectory traj = solver::implicit_baseline(model, w0, cfg.t_end, cfg.intervals);
        const energy::EnergyReport rep = energy::eval_energy(model, traj);
        const energy::Certificate cert = energy::certificate(rep, cfg.certificate_tol);

        Json report = to_json(rep);
        report["certificate"] = {{"solved", cert.solved}, {"tol", cert.tol}};
        ensure_dir(cfg.output_dir);
        disc::write_trajectory_csv((cfg.output_dir / "baseline.csv").string(), traj);
        write_json_file(cfg.output_dir / "baseline_report.json", report);
        write_profiles(cfg.output_dir / "baseline_profiles.dat", traj);
        out << "baseline " << model.name << ": " << cfg.intervals << " steps, J=" << short_num(rep.total)
            << " normalized=" << short_num(rep.normalized) << '\n';
        return kExitOk;
    });
}

int run_verify(const fs::path& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const RunConfig cfg = load_config(config);
        const models::ModelSpec model = build_model(cfg);
        const disc::SpaceGrid grid = build_grid(cfg);
        models::SamplerConfig sampler = cfg.sampler;
        sampler.t_end = cfg.t_end;

        Json reports = Json::array();
        int passed = 0;
        int total = 0;
        for (models::Condition c : models::all_conditions()) {
            if (c == models::Condition::uniform_convexity && !uniform_convexity_applies(model)) {
                err << "skipping uniform_convexity: needs q = 2 or eps > 0\n";
                continue;
            }
            const models::ConditionReport rep = models::check_condition(model, grid, c, sampler);
            ++total;
            if (rep.pass) ++passed;
            err << models::condition_name(c) << ": " << (rep.pass ? "pass" : "FAIL")
                << " worst margin " << num(rep.worst_margin) << '\n';
            reports.push_back(to_json(rep));
        }
        ensure_dir(cfg.output_dir);
        write_json_file(cfg.output_dir / "verify.json", reports);
        out << "verify " << model.name << ": " << passed << "/" << total << " conditions pass\n";
        return passed == total ? kExitOk : kExitFailed;
    });
}

int run_gradcheck(const fs::path& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunConfig cfg = load_config(config);
        const models::ModelSpec model = build_model(cfg);
        cfg.solve.init = solver::InitKind::random;
        const disc::Trajectory traj =
            solver::initial_trajectory(initial_field(cfg), cfg.t_end, cfg.intervals, cfg.solve);
        const energy::EnergyFunctional functional(model, traj.grid());
        const energy::GradientCheck check =
            energy::finite_difference_check(functional, traj, 20, cfg.solve.seed);
        const bool ok = check.worst_relative <= 1e-5;
        err << "directions " << check.directions << ", worst relative error " << num(check.worst_relative) << '\n';
        out << "gradcheck " << model.name << ": worst relative error " << short_num(check.worst_relative)
            << (ok ? " ok" : " FAIL") << '\n';
        return ok ? kExitOk : kExitFailed;
    });
}

int run_conjugate_table(const TableOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (opts.steps < 2) throw InvalidInput("--steps must be >= 2");
        if (!(opts.max > opts.min)) throw InvalidInput("--max must exceed --min");
        const convex::PowerDensity density(opts.a, opts.q, opts.eps);
        std::vector<double> ys(static_cast<std::size_t>(opts.steps));
        std::vector<double> values(ys.size());
        std::vector<double> args(ys.size());
        std::vector<bool> ok(ys.size(), true);
        int failures = 0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            ys[i] = opts.min + (opts.max - opts.min) * static_cast<double>(i) / (opts.steps - 1);
            try {
                Eigen::VectorXd y(1);
                y[0] = ys[i];
                const convex::ConjugateValue cv = convex::eval_conjugate(density, y);
                values[i] = cv.value;
                args[i] = cv.argmax[0];
            } catch (const NumericalFailure& e) {
                ok[i] = false;
                ++failures;
                err << "row " << i << " (y=" << num(ys[i]) << "): " << e.what() << '\n';
            }
        }

        if (!opts.out.parent_path().empty()) ensure_dir(opts.out.parent_path());
        auto file = open_output(opts.out);
        file << "y,psi_star,argmax\n";
        for (std::size_t i = 0; i < ys.size(); ++i) {
            file << num(ys[i]) << ',' << (ok[i] ? num(values[i]) : "failed") << ','
                 << (ok[i] ? num(args[i]) : "failed") << '\n';
        }
        if (!file) throw IoError("write failed for " + opts.out.string());

        bool shape_ok = true;
        for (std::size_t i = 1; i < ys.size(); ++i) {
            if (ok[i] && ok[i - 1] && args[i] < args[i - 1]) shape_ok = false;
            if (i + 1 < ys.size() && ok[i - 1] && ok[i] && ok[i + 1] &&
                values[i + 1] - 2.0 * values[i] + values[i - 1] < -1e-9) {
                shape_ok = false;
            }
        }
        if (!shape_ok) err << "table is not monotone/convex\n";
        out << "conjugate-table: " << ys.size() << " rows, " << failures << " failed -> "
            << opts.out.string() << '\n';
        return failures == 0 && shape_ok ? kExitOk : kExitFailed;
    });
}

}  // namespace ben::cli
