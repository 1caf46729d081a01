#include "unistab/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "unistab/expectation.hpp"

namespace unistab {

bool TargetFractions::all_positive() const {
    for (int i = 0; i < v.size(); ++i) {
        if (!(v(i) > 0.0)) return false;
    }
    return v.size() > 0;
}

std::vector<int> TargetFractions::nonpositive_indices() const {
    std::vector<int> idx;
    for (int i = 0; i < v.size(); ++i) {
        if (!(v(i) > 0.0)) idx.push_back(i);
    }
    return idx;
}

TargetFractions target_fractions(const GainSpectrum& spec, double q) {
    if (spec.dim() < 1) throw ZeroDimension("target fractions need dimension >= 1");
    if (!(q > 0.0) || q > 1.0) throw InvalidRange("survival probability must lie in (0, 1]");
    const int d = spec.dim();
    const Vec inv_sq = spec.inv_sq();
    const double sigma = inv_sq.sum();
    TargetFractions t;
    t.q = q;
    t.v = Vec::Ones(d) - (static_cast<double>(d) - q) / sigma * inv_sq;
    return t;
}

namespace {

Vec normalized_targets(const TargetFractions& targets) {
    const int d = static_cast<int>(targets.v.size());
    if (d < 1) throw ZeroDimension("fixed point needs dimension >= 1");
    auto bad = targets.nonpositive_indices();
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "targets must be strictly positive; offending components:";
        std::vector<double> vals;
        for (int i : bad) {
            msg << " v[" << i << "]=" << targets.v(i);
            vals.push_back(targets.v(i));
        }
        throw InvalidTargets(msg.str(), vals);
    }
    if (!(targets.q > 0.0) || targets.q > 1.0) {
        throw InvalidRange("survival probability must lie in (0, 1]");
    }
    Vec u = targets.v / targets.q;  // stationary per-step expectations
    if (std::abs(u.sum() - 1.0) > 1e-9) {
        throw InvalidTargets("normalized targets must sum to 1 within 1e-9", {u.sum()});
    }
    return u;
}

double max_residual(const Vec& m, const Vec& u) { return (m - u).cwiseAbs().maxCoeff(); }

}  // namespace

WeightMatrix solve_weight_fixed_point(const TargetFractions& targets, double tol) {
    const Vec u = normalized_targets(targets);
    const int d = static_cast<int>(u.size());
    if (d == 1) return WeightMatrix{Vec::Ones(1)};

    constexpr int kBudget = 10000;
    constexpr double kDamping = 0.5;
    Vec p = Vec::Ones(d);
    double best_resid = std::numeric_limits<double>::infinity();
    int since_improvement = 0;
    int sweeps = 0;
    bool bisection_mode = false;

    while (sweeps < kBudget) {
        Vec m = ratio_expectation_all(WeightMatrix{p}).values;
        ++sweeps;
        const double resid = max_residual(m, u);
        if (resid <= tol) return WeightMatrix{p};
        if (resid < 0.9 * best_resid) {
            best_resid = resid;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        if (!bisection_mode && since_improvement >= 60) bisection_mode = true;

        if (!bisection_mode) {
            for (int i = 0; i < d; ++i) p(i) *= std::pow(u(i) / m(i), kDamping);
            p /= p(0);
        } else {
            // Coordinate-wise bisection: m_i is continuous and strictly
            // increasing in p_i, so each one-dimensional solve brackets.
            for (int i = 1; i < d && sweeps < kBudget; ++i) {
                double lo = p(i) * 1e-6, hi = p(i) * 1e6;
                for (int it = 0; it < 80 && sweeps < kBudget; ++it) {
                    const double mid = std::sqrt(lo * hi);
                    Vec trial = p;
                    trial(i) = mid;
                    const double mi = ratio_expectation(WeightMatrix{trial}, i);
                    ++sweeps;
                    if (mi < u(i)) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if (hi / lo < 1.0 + 1e-12) break;
                }
                p(i) = std::sqrt(lo * hi);
            }
            p /= p(0);
        }
    }
    throw NoConvergence("weight fixed point did not reach tolerance", kBudget);
}

WeightMatrix riccati_step(const WeightMatrix& w_next, const GainSpectrum& spec, double q) {
    if (w_next.dim() != spec.dim()) throw DimensionMismatch("weight and spectrum dimensions differ");
    if (!(q > 0.0) || q > 1.0) throw InvalidRange("survival probability must lie in (0, 1]");
    const Vec m = ratio_expectation_all(w_next).values;
    Vec w(w_next.dim());
    for (int i = 0; i < w.size(); ++i) {
        const double lam2 = spec[i] * spec[i];
        w(i) = lam2 * w_next.w(i) * (1.0 - q * m(i));
    }
    return WeightMatrix{w};
}

Vec RiccatiTrace::weights_at(int index) const {
    if (index < 0 || index >= length()) throw InvalidRange("trace index out of range");
    return log_weights[static_cast<std::size_t>(index)].array().exp().matrix();
}

RiccatiTrace riccati_sequence(const WeightMatrix& p, const GainSpectrum& spec, int n_steps,
                              double q) {
    if (p.dim() != spec.dim()) throw DimensionMismatch("weight and spectrum dimensions differ");
    if (n_steps < 1) throw InvalidRange("trace needs at least one step");
    if (!(q > 0.0) || q > 1.0) throw InvalidRange("survival probability must lie in (0, 1]");
    const int d = spec.dim();
    RiccatiTrace trace;
    trace.log_weights.reserve(static_cast<std::size_t>(n_steps) + 1);
    trace.ratios.resize(n_steps, d);
    Vec lw = p.w.array().log().matrix();
    trace.log_weights.push_back(lw);
    for (int k = 0; k < n_steps; ++k) {
        // Scale-free expectations: shift logs so the largest weight is 1.
        const Vec scaled = (lw.array() - lw.maxCoeff()).exp().matrix();
        const Vec m = ratio_expectation_all(WeightMatrix{scaled}).values;
        for (int i = 0; i < d; ++i) {
            const double lam2 = spec[i] * spec[i];
            const double ratio = lam2 * (1.0 - q * m(i));
            trace.ratios(k, i) = ratio;
            lw(i) += std::log(ratio);
        }
        trace.log_weights.push_back(lw);
    }
    return trace;
}

DecayRateEstimate measured_decay_rate(const RiccatiTrace& trace) {
    if (trace.length() < 2) throw InvalidRange("decay rate needs a trace of length >= 2");
    const double mean_log = trace.ratios.array().log().mean();
    const double rate = std::exp(mean_log);
    const double max_dev = (trace.ratios.array() - rate).abs().maxCoeff();
    return DecayRateEstimate{rate, max_dev};
}

}  // namespace unistab
