#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ben/cli.hpp"

using namespace ben;
using namespace ben::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ben_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    return path;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string small_heat(const fs::path& out_dir, const std::string& model = "heat") {
    return "[model]\nname = " + model +
           "\n[grid]\nN = 9\n[time]\nT = 0.1\nM = 8\n"
           "[solve]\ninit = random\nseed = 2\nmax_iters = 5000\ngrad_tol = 1e-12\nenergy_tol = 1e-13\n"
           "compare_baseline = true\n[verify]\nsamples = 500\n[output]\ndir = " +
           out_dir.string() + "\n";
}

}  // namespace

TEST_CASE("config parsing with sections, comments and dotted keys") {
    std::istringstream in(
        "# comment\n"
        "[model]\n"
        "name = burgers   # trailing comment\n"
        "u_max = 4\n"
        "grid.N = 12\n"
        "[time]\n"
        "M = 5\n"
        "T = 0.5\n"
        "[solve]\n"
        "lbfgs = false\n"
        "init = random\n");
    const RunConfig c = parse_config(in);
    CHECK(c.model == "burgers");
    CHECK(c.u_max == 4.0);
    CHECK(c.nodes == 12);
    CHECK(c.intervals == 5);
    CHECK(c.t_end == 0.5);
    CHECK_FALSE(c.solve.use_lbfgs);
    CHECK(c.solve.init == solver::InitKind::random);
    const models::ModelSpec m = build_model(c);
    CHECK(m.name == "burgers");
    CHECK(m.scalar_flux->lipschitz == 4.0);
    CHECK(build_grid(c).interior_nodes() == 12);
}

TEST_CASE("config errors name the offending key") {
    auto key_of = [](const std::string& text) -> std::string {
        std::istringstream in(text);
        try {
            parse_config(in);
        } catch (const ConfigError& e) {
            return e.key();
        }
        return "";
    };
    CHECK(key_of("[model]\nflavour = x\n") == "model.flavour");
    CHECK(key_of("time.M = 0\n") == "time.M");
    CHECK(key_of("model.q = 1.5\n") == "model.q");
    CHECK(key_of("model.name = wave\n") == "model.name");
    CHECK(key_of("grid.N = ten\n") == "grid.N");
    CHECK(key_of("solve.lbfgs = maybe\n") == "solve.lbfgs");
    CHECK(key_of("initial.profile = csv\n") == "initial.path");
    CHECK(key_of("initial.profile = csv\ninitial.path = /does/not/exist.csv\n") == "initial.path");
    CHECK(key_of("model.components = 2\n") == "model.components");
    CHECK(key_of("[model\n") == "line 1");
}

TEST_CASE("invalid config maps to exit code 2") {
    const fs::path dir = scratch("bad_config");
    const fs::path cfg = write_file(dir / "bad.cfg", "[time]\nM = 0\n");
    std::ostringstream out, err;
    CHECK(run_solve(cfg, out, err) == kExitConfig);
    CHECK(err.str().find("time.M") != std::string::npos);
    CHECK(run_verify(cfg, out, err) == kExitConfig);
}

TEST_CASE("missing files map to exit code 4") {
    const fs::path dir = scratch("missing");
    std::ostringstream out, err;
    CHECK(run_solve(dir / "nope.cfg", out, err) == kExitIo);

    // output directory blocked by a regular file
    write_file(dir / "blocker", "x");
    const fs::path cfg = write_file(dir / "run.cfg", small_heat(dir / "blocker" / "sub"));
    CHECK(run_baseline(cfg, out, err) == kExitIo);
}

TEST_CASE("csv initial profile") {
    const fs::path dir = scratch("csv");
    write_file(dir / "w0.csv", "value\n0.1\n0.2\n0.3\n");
    std::istringstream in("grid.N = 3\ninitial.profile = csv\ninitial.path = w0.csv\n");
    const RunConfig c = parse_config(in, dir);
    const disc::Field w0 = initial_field(c);
    CHECK(w0.values()[2] == 0.3);

    write_file(dir / "short.csv", "0.1,0.2\n");
    std::istringstream in2("grid.N = 3\ninitial.profile = csv\ninitial.path = short.csv\n");
    CHECK_THROWS_AS(initial_field(parse_config(in2, dir)), IoError);
}

TEST_CASE("built-in profiles") {
    std::istringstream in("grid.N = 9\ninitial.profile = bump\n");
    const disc::Field bump = initial_field(parse_config(in));
    CHECK(bump.values()[4] == doctest::Approx(1.0));
    CHECK(bump.values()[0] == 0.0);
    std::istringstream tin("model.name = trivial\n");
    CHECK(initial_field(parse_config(tin)).values().norm() == 0.0);
}

TEST_CASE("solve writes certified artifacts") {
    const fs::path dir = scratch("solve");
    const fs::path cfg = write_file(dir / "heat.cfg", small_heat(dir / "out"));
    std::ostringstream out, err;
    REQUIRE(run_solve(cfg, out, err) == kExitOk);
    CHECK(out.str().find("solved") != std::string::npos);
    for (const char* f : {"trajectory.csv", "report.json", "history.csv", "profiles.dat"}) {
        CHECK(fs::exists(dir / "out" / f));
    }
    const auto report = nlohmann::ordered_json::parse(read_file(dir / "out" / "report.json"));
    CHECK(report["normalized"].get<double>() <= 1e-6);
    CHECK(report["certificate"]["solved"].get<bool>());
    CHECK(report.contains("compare_baseline"));
    CHECK(report["compare_baseline"]["relative_l2"].get<double>() < 0.1);

    // the written trajectory reloads and certifies on its own
    const RunConfig c = load_config(cfg);
    const disc::Trajectory traj =
        disc::read_trajectory_csv((dir / "out" / "trajectory.csv").string(), build_grid(c), 1);
    const energy::Certificate cert = energy::certificate(build_model(c), traj, 1e-6);
    CHECK(cert.solved);
    CHECK(cert.normalized == doctest::Approx(report["normalized"].get<double>()));
}

TEST_CASE("Burgers solve reports the baseline comparison") {
    const fs::path dir = scratch("burgers");
    const fs::path cfg = write_file(dir / "b.cfg", small_heat(dir / "out", "burgers"));
    std::ostringstream out, err;
    CHECK(run_solve(cfg, out, err) == kExitOk);
    CHECK(out.str().find("baseline_rel=") != std::string::npos);
    CHECK(read_file(dir / "out" / "report.json").find("\"compare_baseline\"") != std::string::npos);
}

TEST_CASE("baseline and gradcheck commands") {
    const fs::path dir = scratch("baseline");
    const fs::path cfg = write_file(dir / "b.cfg", small_heat(dir / "out", "burgers"));
    std::ostringstream out, err;
    CHECK(run_baseline(cfg, out, err) == kExitOk);
    CHECK(fs::exists(dir / "out" / "baseline.csv"));
    CHECK(fs::exists(dir / "out" / "baseline_report.json"));
    CHECK(run_gradcheck(cfg, out, err) == kExitOk);
    CHECK(out.str().find("gradcheck burgers") != std::string::npos);
}

TEST_CASE("verify reports pass and failure") {
    const fs::path dir = scratch("verify");
    std::ostringstream out, err;
    const fs::path ok = write_file(dir / "heat.cfg", small_heat(dir / "heat"));
    CHECK(run_verify(ok, out, err) == kExitOk);

    const fs::path bad = write_file(dir / "adv.cfg",
                                    "[model]\nname = adversarial\nkappa = 2000\nmu_bar = 1\n[grid]\nN = 17\n"
                                    "[verify]\nsamples = 1000\n[output]\ndir = " +
                                        (dir / "adv").string() + "\n");
    CHECK(run_verify(bad, out, err) == kExitFailed);
    const auto reports = nlohmann::ordered_json::parse(read_file(dir / "adv" / "verify.json"));
    bool saw_positivity = false;
    for (const auto& r : reports) {
        if (r["condition_name"] == "positivity") {
            saw_positivity = true;
            CHECK(r["verdict"] == "fail");
            CHECK_FALSE(r["witnesses"].empty());
        }
    }
    CHECK(saw_positivity);
}

TEST_CASE("conjugate table") {
    const fs::path dir = scratch("table");
    std::ostringstream out, err;
    TableOptions t;
    t.out = dir / "q2.csv";
    REQUIRE(run_conjugate_table(t, out, err) == kExitOk);
    std::istringstream rows(read_file(t.out));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "y,psi_star,argmax");
    int count = 0;
    while (std::getline(rows, line)) {
        double y = 0, v = 0, z = 0;
        REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &y, &v, &z) == 3);
        CHECK(v == doctest::Approx(0.5 * y * y).epsilon(1e-12));
        CHECK(z == doctest::Approx(y).epsilon(1e-12));
        if (count == 20) {
            CHECK(y == 0.0);
            CHECK(v == 0.0);
            CHECK(z == 0.0);
        }
        ++count;
    }
    CHECK(count == 41);

    t.q = 4.0;
    t.out = dir / "sub" / "q4.csv";
    CHECK(run_conjugate_table(t, out, err) == kExitOk);
    t.steps = 1;
    CHECK(run_conjugate_table(t, out, err) == kExitConfig);
}

TEST_CASE("json output") {
    std::ostringstream s;
    nlohmann::ordered_json j;
    j["x"] = 0.1;
    j["bad"] = std::nan("");
    j["n"] = 3;
    j["list"] = {1.5, true};
    write_json(s, j);
    const std::string text = s.str();
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    CHECK(text.find("\"bad\": null") != std::string::npos);
    CHECK(nlohmann::ordered_json::parse(text)["list"][0] == 1.5);

    energy::EnergyReport rep;
    rep.total = 2.5;
    const auto jr = to_json(rep);
    CHECK(jr["total"] == 2.5);
    CHECK(jr.contains("defect_norm"));
}

TEST_CASE("bundled configs parse") {
    for (const char* name : {"heat", "burgers", "adversarial", "divform"}) {
        const fs::path p = fs::path(BEN_SOURCE_DIR) / "configs" / (std::string(name) + ".cfg");
        CAPTURE(name);
        const RunConfig c = load_config(p);
        CHECK(c.model == name);
        CHECK_NOTHROW(build_model(c));
        CHECK_NOTHROW(initial_field(c));
    }
}
