#include "unistab/expectation.hpp"

#include <cmath>

#include "unistab/numerics.hpp"

namespace unistab {

namespace {

void require_valid_weights(const WeightMatrix& p) {
    if (p.dim() < 1) throw ZeroDimension("ratio expectation needs dimension >= 1");
    for (int k = 0; k < p.dim(); ++k) {
        if (!(p.w(k) > 0.0)) throw NonPositiveWeight("ratio expectation needs positive weights");
    }
}

// integrand of E[p_i z_i^2 / sum p_k z_k^2] after t = s/(1-s):
//   p_i (1+2t p_i)^{-1} prod_k (1+2t p_k)^{-1/2} * (1+t)^2
double component_integral(const Vec& p, int i) {
    auto f = [&p, i](double s) {
        const double t = s / (1.0 - s);
        double prod = 1.0;
        for (int k = 0; k < p.size(); ++k) prod *= 1.0 + 2.0 * t * p(k);
        const double dt_ds = (1.0 + t) * (1.0 + t);
        return p(i) / (1.0 + 2.0 * t * p(i)) / std::sqrt(prod) * dt_ds;
    };
    return numerics::integrate_gk15(f, 0.0, 1.0, 1e-13, 1e-12);
}

}  // namespace

double ratio_expectation(const WeightMatrix& p, int i) {
    require_valid_weights(p);
    if (i < 0 || i >= p.dim()) throw InvalidRange("component index out of range");
    if (p.dim() == 1) return 1.0;  // the ratio is identically 1 in dimension 1
    const Vec pm = p.w / p.w.maxCoeff();  // scale-free; avoids overflow in the product
    return component_integral(pm, i);
}

RatioExpectationReport ratio_expectation_all(const WeightMatrix& p) {
    require_valid_weights(p);
    RatioExpectationReport report;
    report.method = ExpectationMethod::quadrature;
    report.values.resize(p.dim());
    if (p.dim() == 1) {
        report.values(0) = 1.0;
        return report;
    }
    const Vec pm = p.w / p.w.maxCoeff();
    for (int i = 0; i < p.dim(); ++i) report.values(i) = component_integral(pm, i);
    return report;
}

RatioExpectationReport ratio_expectation_mc(const WeightMatrix& p, long n_samples, SeededRng& rng) {
    require_valid_weights(p);
    if (n_samples < 2) throw InvalidRange("Monte Carlo needs at least 2 samples");
    const int d = p.dim();
    Vec sum = Vec::Zero(d), sum_sq = Vec::Zero(d), z(d), contrib(d);
    for (long s = 0; s < n_samples; ++s) {
        for (int k = 0; k < d; ++k) z(k) = rng.normal();
        double denom = 0.0;
        for (int k = 0; k < d; ++k) {
            contrib(k) = p.w(k) * z(k) * z(k);
            denom += contrib(k);
        }
        if (denom <= 0.0) {  // measure-zero all-zero draw
            --s;
            continue;
        }
        for (int k = 0; k < d; ++k) {
            const double v = contrib(k) / denom;
            sum(k) += v;
            sum_sq(k) += v * v;
        }
    }
    RatioExpectationReport report;
    report.method = ExpectationMethod::monte_carlo;
    report.n_samples = n_samples;
    report.values = sum / static_cast<double>(n_samples);
    report.std_errors.resize(d);
    for (int k = 0; k < d; ++k) {
        const double var =
            (sum_sq(k) - sum(k) * sum(k) / static_cast<double>(n_samples)) /
            static_cast<double>(n_samples - 1);
        report.std_errors(k) = std::sqrt(std::max(0.0, var) / static_cast<double>(n_samples));
    }
    return report;
}

Vec expected_m_matrix(const WeightMatrix& w) { return ratio_expectation_all(w).values; }

}  // namespace unistab
