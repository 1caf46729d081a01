#pragma once

#include <vector>

#include "unistab/core.hpp"

namespace unistab {

// Stationary energy-removal fractions. v_i = 1 - (d-q) lambda_i^{-2} / Sigma
// over the given spectrum's own dimension d; their sum is q (so exactly 1 at
// q = 1). q is uniformly the survival probability of the control.
struct TargetFractions {
    Vec v;
    double q = 1.0;

    bool all_positive() const;
    std::vector<int> nonpositive_indices() const;
};

TargetFractions target_fractions(const GainSpectrum& spec, double q = 1.0);

// Solves for p > 0 (normalized p_1 = 1) such that the ratio expectations of p
// match the targets within tol in max norm. Targets with q < 1 are normalized
// by q first (the stationary per-step expectations are v_i/q; at q = 1 this is
// the identity and the raw fractions must sum to 1 within 1e-9).
// Damped multiplicative iteration (exponent 0.5) with a coordinate-wise
// bisection fallback; throws InvalidTargets or NoConvergence.
WeightMatrix solve_weight_fixed_point(const TargetFractions& targets, double tol = 1e-9);

// One backward step of the weight recursion:
//   w_i = lambda_i^2 * w_next_i * (1 - q * m_i),  m = ratio_expectation_all(w_next).
WeightMatrix riccati_step(const WeightMatrix& w_next, const GainSpectrum& spec, double q = 1.0);

// Backward iterates of riccati_step, stored in log space so geometric traces
// survive horizons where the raw weights would overflow or underflow.
// Index 0 is the starting weights (step N); index k is the k-th backward
// iterate (step N-k). ratios(k, i) = w[N-k-1, i] / w[N-k, i].
struct RiccatiTrace {
    std::vector<Vec> log_weights;  // n_steps + 1 entries
    Eigen::MatrixXd ratios;        // n_steps x d

    int length() const { return static_cast<int>(log_weights.size()); }
    int dim() const { return log_weights.empty() ? 0 : static_cast<int>(log_weights[0].size()); }
    // exp of the stored logs; may overflow to inf for extreme traces.
    Vec weights_at(int index) const;
};

RiccatiTrace riccati_sequence(const WeightMatrix& p, const GainSpectrum& spec, int n_steps,
                              double q = 1.0);

// Geometric-mean per-step rate of a trace and the largest absolute deviation
// of any single per-step per-coordinate ratio from it.
struct DecayRateEstimate {
    double rate;
    double max_abs_deviation;
};

DecayRateEstimate measured_decay_rate(const RiccatiTrace& trace);

}  // namespace unistab
