#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ben/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Space-time energy minimization for parabolic evolution equations"};
    app.require_subcommand(1);

    std::string config;
    auto* solve = app.add_subcommand("solve", "minimize J and certify the trajectory");
    solve->add_option("config", config, "config file")->required();
    auto* baseline = app.add_subcommand("baseline", "run the implicit Euler baseline");
    baseline->add_option("config", config, "config file")->required();
    auto* verify = app.add_subcommand("verify", "sample the structural hypotheses");
    verify->add_option("config", config, "config file")->required();
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the energy gradient");
    gradcheck->add_option("config", config, "config file")->required();

    ben::cli::TableOptions table;
    std::string table_out = table.out.string();
    auto* conj = app.add_subcommand("conjugate-table", "tabulate the scalar conjugate density");
    conj->add_option("--q", table.q, "exponent")->capture_default_str();
    conj->add_option("--a", table.a, "coefficient")->capture_default_str();
    conj->add_option("--eps", table.eps, "quadratic regularizer")->capture_default_str();
    conj->add_option("--min", table.min, "first y")->capture_default_str();
    conj->add_option("--max", table.max, "last y")->capture_default_str();
    conj->add_option("--steps", table.steps, "number of rows")->capture_default_str();
    conj->add_option("--out", table_out, "output CSV")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ben::cli::kExitConfig;
    }

    if (*solve) return ben::cli::run_solve(config, std::cout, std::cerr);
    if (*baseline) return ben::cli::run_baseline(config, std::cout, std::cerr);
    if (*verify) return ben::cli::run_verify(config, std::cout, std::cerr);
    if (*gradcheck) return ben::cli::run_gradcheck(config, std::cout, std::cerr);
    table.out = table_out;
    return ben::cli::run_conjugate_table(table, std::cout, std::cerr);
}
