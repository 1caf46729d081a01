#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "unistab/cli.hpp"

namespace {

int with_output(const std::string& path, const std::function<int(std::ostream&)>& fn) {
    if (path.empty()) return fn(std::cout);
    std::ofstream file(path);
    if (!file) {
        std::cerr << "cannot open output file: " << path << "\n";
        return 66;
    }
    return fn(file);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"second-moment stabilizability of diagonal systems actuated along a uniformly "
                 "random direction"};
    app.require_subcommand(1);

    std::vector<double> threshold_lambdas;
    std::string threshold_out;
    CLI::App* threshold =
        app.add_subcommand("threshold", "classify a spectrum and print its stability threshold");
    threshold->add_option("lambdas", threshold_lambdas, "gain eigenvalues")
        ->required()
        ->expected(-1);
    threshold->add_option("--out", threshold_out, "write output to a file");

    std::string simulate_config, simulate_out;
    CLI::App* simulate =
        app.add_subcommand("simulate", "run a Monte Carlo ensemble from a config file");
    simulate->add_option("config", simulate_config, "config file path")->required();
    simulate->add_option("--out", simulate_out, "write CSV to a file");

    unistab::cli::SweepOptions sweep_opts;
    std::string sweep_out;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "phase-diagram CSV over a (lambda1, lambda2) grid");
    sweep->add_option("--min1", sweep_opts.min1, "axis 1 lower bound")->capture_default_str();
    sweep->add_option("--max1", sweep_opts.max1, "axis 1 upper bound")->capture_default_str();
    sweep->add_option("--steps1", sweep_opts.steps1, "axis 1 grid points")->capture_default_str();
    sweep->add_option("--min2", sweep_opts.min2, "axis 2 lower bound")->capture_default_str();
    sweep->add_option("--max2", sweep_opts.max2, "axis 2 upper bound")->capture_default_str();
    sweep->add_option("--steps2", sweep_opts.steps2, "axis 2 grid points")->capture_default_str();
    sweep->add_option("--template", sweep_opts.grid_template,
                      "grid template: two_d | four_d_paired")
        ->capture_default_str();
    sweep->add_option("--horizon", sweep_opts.horizon,
                      "simulation horizon (enables empirical columns)");
    sweep->add_option("--trials", sweep_opts.trials, "trials per cell (enables empirical columns)");
    sweep->add_option("--seed", sweep_opts.seed, "base seed (enables empirical columns)");
    sweep->add_option("--out", sweep_out, "write CSV to a file");

    std::vector<double> solve_lambdas;
    double solve_q = 1.0;
    std::string solve_out;
    CLI::App* solve =
        app.add_subcommand("solve-weights", "solve the stationary weight fixed point");
    solve->add_option("lambdas", solve_lambdas, "gain eigenvalues")->required()->expected(-1);
    solve->add_option("--q", solve_q, "control survival probability in (0, 1]")
        ->capture_default_str();
    solve->add_option("--out", solve_out, "write output to a file");

    std::uint64_t verify_seed = 0;
    std::string verify_fault, verify_out;
    CLI::App* verify = app.add_subcommand("verify", "run the fast self-check suite");
    verify->add_option("--seed", verify_seed, "seed for the sampled checks")
        ->capture_default_str();
    verify->add_option("--inject-fault", verify_fault,
                       "negative control; recognized value: expectation-bias");
    verify->add_option("--out", verify_out, "write the report to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    try {
        if (threshold->parsed()) {
            return with_output(threshold_out, [&](std::ostream& out) {
                return unistab::cli::cmd_threshold(threshold_lambdas, out, std::cerr);
            });
        }
        if (simulate->parsed()) {
            return with_output(simulate_out, [&](std::ostream& out) {
                return unistab::cli::cmd_simulate(simulate_config, out, std::cerr);
            });
        }
        if (sweep->parsed()) {
            sweep_opts.empirical = sweep->count("--horizon") > 0 || sweep->count("--trials") > 0 ||
                                   sweep->count("--seed") > 0;
            return with_output(sweep_out, [&](std::ostream& out) {
                return unistab::cli::cmd_sweep(sweep_opts, out, std::cerr);
            });
        }
        if (solve->parsed()) {
            return with_output(solve_out, [&](std::ostream& out) {
                return unistab::cli::cmd_solve_weights(solve_lambdas, solve_q, out, std::cerr);
            });
        }
        if (verify->parsed()) {
            return with_output(verify_out, [&](std::ostream& out) {
                return unistab::cli::cmd_verify(verify_seed, verify_fault, out, std::cerr);
            });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 70;
    }
    return 64;
}
