#pragma once

#include "unistab/core.hpp"
#include "unistab/weights.hpp"

namespace unistab {

// Parameters of the mixed (drop + subsystem lifting) strategy for spectra with
// both stable and unstable modes. q is the survival probability; h > 1 is the
// drop threshold (drop whenever 1/||T b|| >= h, a deterministic function of
// the sampled direction, which makes the drop rate exactly 1-q); p_sub is the
// stationary weight matrix of the embedded m-dimensional system; r_prime is
// the slackened decay rate (m-q)/Sigma over the unstable part. r_prime < 1 is
// a hard invariant.
struct MixedStrategyParams {
    int m = 0;
    double q = 0.0;
    double h = 0.0;
    WeightMatrix p_sub;
    double r_prime = 0.0;
};

// The scalar u minimizing (A x + b u)^T W (A x + b u):
//   u = -(b^T W A x) / (b^T W b).
double greedy_control(const WeightMatrix& w_next, const GainSpectrum& spec, const StateVector& x,
                      const ActuationDirection& b);

// Stationary weights: the fixed point of the target fractions at q = 1.
// Throws NotCase1a (with the offending fractions) when some target is <= 0.
WeightMatrix stationary_controller(const GainSpectrum& spec);

// h > 1 with Prob(||T B|| <= 1/h) = 1 - q for B uniform on S_d and T keeping
// the first m coordinates: ||T B||^2 follows Beta(m/2, (d-m)/2), inverted by
// bisection on the numerically integrated incomplete beta. Requires
// 1 <= m < d and 0 < q < 1.
double drop_threshold(int d, int m, double q);

// Mixed-strategy control: 0 on the drop branch; otherwise the greedy control
// u' of the embedded system (state T x, direction T b/||T b||, spectrum head,
// weights w_next_sub) scaled as u = u'/||T b||.
double mixed_control(const MixedStrategyParams& params, const WeightMatrix& w_next_sub,
                     const GainSpectrum& spec, const StateVector& x, const ActuationDirection& b);

// Chooses q so the subsystem rate r' = (m-q)/Sigma lands at (1+r)/2 (splitting
// the slack evenly), clamped into (0.01, 0.99) only when the clamp keeps
// r' < 1; then h = drop_threshold(d, m, q) and p_sub from the subsystem target
// fractions at this q. Throws NotCase2 or NotStabilizable (r >= 1).
MixedStrategyParams build_mixed_strategy(const GainSpectrum& spec, double tol = 1e-9);

// The same construction with a caller-chosen survival probability.
MixedStrategyParams build_mixed_strategy_with_q(const GainSpectrum& spec, double q,
                                                double tol = 1e-9);

MixedPolicy to_policy(const MixedStrategyParams& params);

}  // namespace unistab
