#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <variant>

#include "unistab/errors.hpp"

namespace unistab {

using Vec = Eigen::VectorXd;

// System state: d finite reals.
using StateVector = Eigen::VectorXd;

// Eigenvalues of the diagonal gain matrix, sorted by descending magnitude at
// construction so the unstable part (|lambda| > 1) is always a leading prefix.
// Every entry must be nonzero. An empty spectrum is a legal value (it is what
// the unstable part of an all-stable system looks like); operations that need
// d >= 1 check for it.
class GainSpectrum {
public:
    GainSpectrum() = default;
    explicit GainSpectrum(Vec lambdas);
    GainSpectrum(std::initializer_list<double> lambdas);

    int dim() const { return static_cast<int>(lam_.size()); }
    const Vec& lambdas() const { return lam_; }
    double operator[](int i) const { return lam_(i); }

    // Number of strictly unstable entries (|lambda| > 1).
    int unstable_count() const;
    // Leading m entries as their own spectrum (order preserved).
    GainSpectrum head(int m) const;
    // Entrywise lambda^{-2}.
    Vec inv_sq() const;

private:
    Vec lam_;
};

// Diagonal symmetric positive definite quadratic-form coefficients.
struct WeightMatrix {
    Vec w;

    WeightMatrix() = default;
    explicit WeightMatrix(Vec weights);
    WeightMatrix(std::initializer_list<double> weights);

    int dim() const { return static_cast<int>(w.size()); }
};

// A unit vector on the d-dimensional hypersphere.
struct ActuationDirection {
    Vec b;

    explicit ActuationDirection(Vec direction, double unit_tol = 1e-12);

    int dim() const { return static_cast<int>(b.size()); }
};

struct ZeroPolicy {};

struct GreedyPolicy {
    WeightMatrix w;
};

// q: survival probability of the control (the complement of the drop rate).
// h: drop threshold (> 1); the control is dropped whenever 1/||T b|| >= h.
// m: unstable-subspace dimension; p_sub: stationary weights of the embedded
// m-dimensional system.
struct MixedPolicy {
    double q;
    double h;
    int m;
    WeightMatrix p_sub;
};

using ControlPolicy = std::variant<ZeroPolicy, GreedyPolicy, MixedPolicy>;

// Eigenvalues of a symmetric nonsingular matrix, sorted by descending
// magnitude. Throws NotSymmetric (relative tolerance sym_tol) or Singular
// (any |eigenvalue| < singular_tol times the largest).
GainSpectrum reduce_symmetric_gain(const Eigen::MatrixXd& a, double sym_tol = 1e-10,
                                   double singular_tol = 1e-12);

// Sum_i p_i x_i^2. Zero iff x = 0.
double weighted_norm_sq(const StateVector& x, const WeightMatrix& p);

}  // namespace unistab
