#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace nujd::cli;

int main(int argc, char** argv) {
    CLI::App app{"Non-unitary joint diagonalization: uniqueness checks, solvers and statistics"};
    app.require_subcommand(1);

    CheckOptions check;
    auto* c = app.add_subcommand("check", "Decide essential uniqueness of a matrix set or spectra file");
    c->add_option("file", check.input, "matrix set or spectra JSON")->required();
    c->add_option("--margin", check.margin, "predicate tolerance");
    c->add_option("--residual-tol", check.residual_tol, "joint diagonalization residual accepted before the check");
    c->add_option("--out", check.out, "write the report here instead of stdout");

    SolveOptions solve;
    auto* s = app.add_subcommand("solve", "Algebraic joint diagonalization of two matrices");
    s->add_option("file", solve.input, "matrix set JSON")->required();
    s->add_option("--method", solve.method, "put, sut or gevd")->check(CLI::IsMember({"put", "sut", "gevd"}));
    s->add_option("--tol", solve.tol, "residual tolerance");
    s->add_option("--out", solve.out, "write the solution here instead of stdout");

    EstimateOptions est;
    auto* e = app.add_subcommand("estimate", "Estimate a matrix set from a signal block");
    e->add_option("file", est.input, "signal JSON")->required();
    e->add_flag("--cov", est.cov, "covariance");
    e->add_flag("--pseudocov", est.pseudocov, "pseudo-covariance");
    e->add_option("--lag", est.lags, "autocorrelation at lag N (repeatable)")->take_all();
    e->add_option("--plag", est.plags, "pseudo-autocorrelation at lag N (repeatable)")->take_all();
    e->add_option("--window", est.windows, "covariance of window START:LENGTH (repeatable)")->take_all();
    e->add_option("--cum4", est.cum4, "fourth-order cumulant slice PATTERN P Q F1 F2 (1-based)")
        ->expected(5)
        ->allow_extra_args(false);
    e->add_option("--out", est.out, "write the matrix set here instead of stdout");

    SimulateOptions sim;
    auto* m = app.add_subcommand("simulate", "Run a Monte Carlo separation experiment");
    m->add_option("file", sim.input, "experiment configuration JSON")->required();
    m->add_option("--seed", sim.seed, "override the configured seed");
    m->add_option("--out", sim.out, "write the report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return exit_usage;
    }

    if (c->parsed()) return guarded([&] { return cmd_check(check, std::cout); }, std::cerr);
    if (s->parsed()) return guarded([&] { return cmd_solve(solve, std::cout); }, std::cerr);
    if (e->parsed()) return guarded([&] { return cmd_estimate(est, std::cout); }, std::cerr);
    return guarded([&] { return cmd_simulate(sim, std::cout); }, std::cerr);
}
