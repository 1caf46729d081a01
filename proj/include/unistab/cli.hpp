#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "unistab/simulate.hpp"

namespace unistab::cli {

struct SweepOptions {
    double min1 = 0.1, max1 = 4.0;
    int steps1 = 20;
    double min2 = 0.1, max2 = 4.0;
    int steps2 = 20;
    std::string grid_template = "two_d";  // two_d | four_d_paired
    bool empirical = false;               // set when sim overrides were given
    int horizon = 1000;
    long trials = 200;
    std::uint64_t seed = 0;
};

// Exit codes: 0 stabilizable, 1 unstabilizable, 2 inconclusive, 64 malformed
// eigenvalue list. Prints one machine-readable line plus a human summary.
int cmd_threshold(const std::vector<double>& lambdas, std::ostream& out, std::ostream& err);

// CSV with a `# `-prefixed effective-config echo; exit 65 on config errors
// (diagnostics with line/field on standard error).
int cmd_simulate(const std::string& config_path, std::ostream& out, std::ostream& err);

// Phase-diagram CSV: lambda1,lambda2,r,predicted,empirical_rate,empirical_verdict.
// Empirical columns are blank unless sim overrides were given; near-threshold
// cells (|r-1| < 0.01) are labeled indeterminate rather than simulated.
int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err);

// Prints p (scaled so the first printed weight is 1, in the order the
// eigenvalues were supplied), the residual max norm, and r. Exit 3 with the
// offending fractions on standard error when the targets are not all positive.
int cmd_solve_weights(const std::vector<double>& lambdas, double q, std::ostream& out,
                      std::ostream& err);

// Fast self-checks (quadrature identities, sampler moments, drop calibration);
// exit 0 iff all pass. inject_fault = "expectation-bias" biases one quadrature
// value by 1e-3 inside the harness (negative control for the checks).
int cmd_verify(std::uint64_t seed, const std::string& inject_fault, std::ostream& out,
               std::ostream& err);

// Sectioned key = value config parser; throws ConfigError with line/field.
SimulationConfig parse_config_file(const std::string& path);

// The effective-config block echoed at the top of simulate CSV output;
// stripping the leading "# " yields a config file that reproduces the run.
std::string effective_config_block(const SimulationConfig& config);

// Shortest decimal form that round-trips a double (17 significant digits).
std::string fmt_g17(double v);

}  // namespace unistab::cli
