#pragma once

#include "unistab/core.hpp"
#include "unistab/sphere.hpp"

namespace unistab {

enum class ExpectationMethod { quadrature, monte_carlo };

struct RatioExpectationReport {
    Vec values;  // d values, each in (0,1) for d >= 2; sum to 1 within method tolerance
    ExpectationMethod method = ExpectationMethod::quadrature;
    long n_samples = 0;  // monte_carlo only
    Vec std_errors;      // monte_carlo only, per component
};

// E over uniform directions B of p_i B_i^2 / sum_k p_k B_k^2 (component i,
// zero-based), evaluated by adaptive quadrature on the identity
//   E[p_i z_i^2 / sum p_k z_k^2]
//     = integral_0^inf p_i (1+2t p_i)^{-3/2} prod_{k != i} (1+2t p_k)^{-1/2} dt
// over iid standard normals z (the ratio is scale-free, so the normalized
// Gaussian construction gives the same law), with the substitution
// t = s/(1-s) and weights pre-scaled so max p = 1.
double ratio_expectation(const WeightMatrix& p, int i);

// All d components by quadrature; the sum equals 1 within 1e-10.
RatioExpectationReport ratio_expectation_all(const WeightMatrix& p);

// Monte Carlo cross-check at n_samples draws, with per-component standard
// errors.
RatioExpectationReport ratio_expectation_mc(const WeightMatrix& p, long n_samples, SeededRng& rng);

// Diagonal of E[ W B B^T / (B^T W B) ]; the off-diagonal entries vanish by
// symmetry and are structurally absent (only the diagonal is returned).
Vec expected_m_matrix(const WeightMatrix& w);

}  // namespace unistab
