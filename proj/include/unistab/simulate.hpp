#pragma once

#include <cstdint>
#include <optional>

#include "unistab/controller.hpp"
#include "unistab/core.hpp"

namespace unistab {

// Squared norms above this cap mark a trajectory as diverged; the remaining
// steps are held at the cap (flagged truncation) so ensemble shapes stay
// intact. Unstable runs are expected outputs, not failures.
inline constexpr double kDivergenceCap = 1e300;

struct SimulationConfig {
    GainSpectrum spec;
    StateVector x0;
    int horizon = 1;  // N >= 1
    long trials = 1;
    std::uint64_t seed = 0;
    ControlPolicy policy = ZeroPolicy{};
    std::optional<WeightMatrix> record_weighted;
};

struct TrajectoryResult {
    Vec sq_norms;                       // N+1 entries of ||X[n]||^2
    Vec weighted;                       // N+1 entries of X^T P X when requested, else empty
    Eigen::MatrixXd coord_sq;           // d x (N+1) per-coordinate squares
    std::optional<int> diverged_step;   // first step whose squared norm crossed the cap
};

enum class EmpiricalVerdict { bounded, growing, indeterminate };

struct EnsembleStats {
    Vec mean_sq_norm;           // N+1
    Vec std_errors;             // N+1, standard error of mean_sq_norm
    Vec mean_weighted;          // N+1 when requested, else empty
    Vec weighted_std_errors;    // N+1 when requested, else empty
    Eigen::MatrixXd per_coord_mean_sq;  // d x (N+1)
    double growth_rate = 0.0;   // fitted per-step geometric rate, tail half of the horizon
    double growth_rate_std_error = 0.0;
    EmpiricalVerdict verdict = EmpiricalVerdict::indeterminate;
    long n_diverged = 0;
};

// One step of the dynamics: x'_i = lambda_i x_i + b_i u.
StateVector step(const StateVector& x, double u, const ActuationDirection& b,
                 const GainSpectrum& spec);

// One trajectory under the configured policy; directions come from the trial's
// own substream (seed, trial_index), so identical inputs give identical
// output regardless of which other trials run.
TrajectoryResult run_trajectory(const SimulationConfig& config, long trial_index);

// Ensemble means with per-step standard errors. Trials are processed in fixed
// 64-trial chunks whose partial sums are merged in chunk order, so the result
// is bit-identical for every thread count (n_threads = 0 picks automatically).
// The growth rate is fitted by least squares on the log of the weighted mean
// (or the squared-norm mean when no weights are recorded) over the last half
// of the horizon; verdict bounded/growing when the fitted rate is 3 fit
// standard errors below/above 1, else indeterminate.
EnsembleStats run_ensemble(const SimulationConfig& config, int n_threads = 0);

// Runs the full system and the embedded m-dimensional system on the same
// direction stream (mixed or zero policy) and returns the max over steps of
// ||T X[n] - X'[n]||. The common control increment is evaluated once and
// applied to both systems, so the reported error measures the lifting
// construction itself rather than rounding amplified through the unstable
// modes.
double run_coupled(const SimulationConfig& config, int m);

const char* to_string(EmpiricalVerdict v);

}  // namespace unistab
