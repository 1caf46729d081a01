#include "unistab/core.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace unistab {

namespace {

Vec sorted_by_descending_magnitude(const Vec& lambdas) {
    std::vector<int> order(lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(lambdas(a)) > std::abs(lambdas(b));
    });
    Vec sorted(lambdas.size());
    for (int i = 0; i < lambdas.size(); ++i) sorted(i) = lambdas(order[i]);
    return sorted;
}

}  // namespace

GainSpectrum::GainSpectrum(Vec lambdas) {
    for (int i = 0; i < lambdas.size(); ++i) {
        if (lambdas(i) == 0.0 || !std::isfinite(lambdas(i))) {
            throw InvalidRange("gain spectrum entries must be nonzero finite reals");
        }
    }
    lam_ = sorted_by_descending_magnitude(lambdas);
}

GainSpectrum::GainSpectrum(std::initializer_list<double> lambdas)
    : GainSpectrum(Eigen::Map<const Vec>(lambdas.begin(), static_cast<long>(lambdas.size()))) {}

int GainSpectrum::unstable_count() const {
    int m = 0;
    for (int i = 0; i < lam_.size(); ++i) {
        if (std::abs(lam_(i)) > 1.0) ++m;
    }
    return m;
}

GainSpectrum GainSpectrum::head(int m) const {
    if (m < 0 || m > dim()) throw InvalidRange("prefix length out of range");
    GainSpectrum sub;
    sub.lam_ = lam_.head(m);
    return sub;
}

Vec GainSpectrum::inv_sq() const { return lam_.array().square().inverse().matrix(); }

WeightMatrix::WeightMatrix(Vec weights) : w(std::move(weights)) {
    for (int i = 0; i < w.size(); ++i) {
        if (!(w(i) > 0.0) || !std::isfinite(w(i))) {
            throw NonPositiveWeight("weight matrix entries must be strictly positive");
        }
    }
}

WeightMatrix::WeightMatrix(std::initializer_list<double> weights)
    : WeightMatrix(Eigen::Map<const Vec>(weights.begin(), static_cast<long>(weights.size()))) {}

ActuationDirection::ActuationDirection(Vec direction, double unit_tol) : b(std::move(direction)) {
    if (b.size() == 0) throw ZeroDimension("actuation direction must have dimension >= 1");
    const double n = b.norm();
    if (std::abs(n - 1.0) > unit_tol) {
        throw InvalidRange("actuation direction must have unit Euclidean norm");
    }
}

GainSpectrum reduce_symmetric_gain(const Eigen::MatrixXd& a, double sym_tol, double singular_tol) {
    if (a.rows() != a.cols()) throw DimensionMismatch("gain matrix must be square");
    const double scale = a.cwiseAbs().maxCoeff();
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol * std::max(scale, 1e-300)) {
        throw NotSymmetric("gain matrix is not symmetric within tolerance");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a + a.transpose()));
    const Vec eig = solver.eigenvalues();
    const double largest = eig.cwiseAbs().maxCoeff();
    for (int i = 0; i < eig.size(); ++i) {
        if (std::abs(eig(i)) < singular_tol * largest) {
            throw Singular("gain matrix is singular within tolerance");
        }
    }
    return GainSpectrum(eig);
}

double weighted_norm_sq(const StateVector& x, const WeightMatrix& p) {
    if (x.size() != p.w.size()) throw DimensionMismatch("state and weight dimensions differ");
    return (p.w.array() * x.array().square()).sum();
}

}  // namespace unistab
