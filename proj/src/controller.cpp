#include "unistab/controller.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "unistab/numerics.hpp"
#include "unistab/stability.hpp"

namespace unistab {

double greedy_control(const WeightMatrix& w_next, const GainSpectrum& spec, const StateVector& x,
                      const ActuationDirection& b) {
    const int d = spec.dim();
    if (w_next.dim() != d || x.size() != d || b.dim() != d) {
        throw DimensionMismatch("greedy control needs matching dimensions");
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < d; ++i) {
        num += b.b(i) * w_next.w(i) * spec[i] * x(i);
        den += w_next.w(i) * b.b(i) * b.b(i);
    }
    return -num / den;  // den > 0: positive weights, unit direction
}

WeightMatrix stationary_controller(const GainSpectrum& spec) {
    const TargetFractions targets = target_fractions(spec, 1.0);
    if (!targets.all_positive()) {
        std::ostringstream msg;
        msg << "stationary weights need all target fractions positive; offending:";
        std::vector<double> vals;
        for (int i : targets.nonpositive_indices()) {
            msg << " v[" << i << "]=" << targets.v(i);
            vals.push_back(targets.v(i));
        }
        throw NotCase1a(msg.str(), vals);
    }
    return solve_weight_fixed_point(targets, 1e-12);
}

double drop_threshold(int d, int m, double q) {
    if (m < 1 || m >= d) throw InvalidRange("drop threshold needs 1 <= m < d");
    if (!(q > 0.0) || !(q < 1.0)) throw InvalidRange("drop threshold needs q in (0, 1)");
    // ||T B||^2 ~ Beta(m/2, (d-m)/2); drop iff ||T B||^2 <= 1/h^2 with
    // probability 1-q.
    const double x = numerics::beta_quantile(0.5 * m, 0.5 * (d - m), 1.0 - q);
    return 1.0 / std::sqrt(x);
}

double mixed_control(const MixedStrategyParams& params, const WeightMatrix& w_next_sub,
                     const GainSpectrum& spec, const StateVector& x, const ActuationDirection& b) {
    const int d = spec.dim();
    const int m = params.m;
    if (x.size() != d || b.dim() != d) throw DimensionMismatch("mixed control dimensions differ");
    if (m < 1 || m >= d) throw InvalidRange("mixed control needs 1 <= m < d");
    if (w_next_sub.dim() != m) throw DimensionMismatch("subsystem weights must have dimension m");
    const double tb_norm = b.b.head(m).norm();
    // Drop branch: 1/||T b|| >= h, i.e. ||T b|| * h <= 1 (a zero block always
    // drops).
    if (tb_norm < 1e-300 || tb_norm * params.h <= 1.0) return 0.0;
    const ActuationDirection b_sub(b.b.head(m) / tb_norm);
    const StateVector x_sub = x.head(m);
    const double u_sub = greedy_control(w_next_sub, spec.head(m), x_sub, b_sub);
    return u_sub / tb_norm;
}

namespace {

MixedStrategyParams finish_mixed_strategy(const GainSpectrum& spec, int m, double sigma, double q,
                                          double tol) {
    MixedStrategyParams params;
    params.m = m;
    params.q = q;
    params.r_prime = (static_cast<double>(m) - q) / sigma;
    if (!(params.r_prime < 1.0)) {
        throw NotStabilizable("no survival probability yields a contracting subsystem rate");
    }
    params.h = drop_threshold(spec.dim(), m, q);
    params.p_sub = solve_weight_fixed_point(target_fractions(spec.head(m), q), tol);
    return params;
}

}  // namespace

MixedStrategyParams build_mixed_strategy(const GainSpectrum& spec, double tol) {
    const StabilityVerdict verdict = classify(spec);
    if (verdict.case_label != StabilityCase::case_2) {
        if (verdict.decision != Decision::stabilizable) {
            throw NotStabilizable("mixed strategy requires r < 1");
        }
        throw NotCase2("mixed strategy applies only to mixed stable/unstable spectra");
    }
    if (verdict.decision != Decision::stabilizable) {
        throw NotStabilizable("mixed strategy requires r < 1");
    }
    const int m = verdict.m;
    const double sigma = verdict.subsystem.inv_sq().sum();
    // r' target (1+r)/2 splits the slack; q always lands in (1/2, 1) when
    // r < 1 because each unstable lambda^{-2} < 1.
    const double r_target = 0.5 * (1.0 + verdict.r);
    const double q_raw = static_cast<double>(m) - r_target * sigma;
    double q = std::clamp(q_raw, 0.01, 0.99);
    // The clamp is only kept when it preserves the hard invariant r' < 1.
    if ((static_cast<double>(m) - q) / sigma >= 1.0) q = q_raw;
    return finish_mixed_strategy(spec, m, sigma, q, tol);
}

MixedStrategyParams build_mixed_strategy_with_q(const GainSpectrum& spec, double q, double tol) {
    const StabilityVerdict verdict = classify(spec);
    if (verdict.case_label != StabilityCase::case_2) {
        throw NotCase2("mixed strategy applies only to mixed stable/unstable spectra");
    }
    if (!(q > 0.0) || !(q < 1.0)) throw InvalidRange("survival probability must lie in (0, 1)");
    const double sigma = verdict.subsystem.inv_sq().sum();
    return finish_mixed_strategy(spec, verdict.m, sigma, q, tol);
}

MixedPolicy to_policy(const MixedStrategyParams& params) {
    return MixedPolicy{params.q, params.h, params.m, params.p_sub};
}

}  // namespace unistab
