#include "unistab/stability.hpp"

#include <cassert>
#include <cmath>

#include "unistab/weights.hpp"

namespace unistab {

namespace {

// Entries with ||lambda|-1| <= epsilon perturbed outward to magnitude
// 1 + 2*epsilon, so the case analysis never sits exactly on |lambda| = 1.
Vec perturbed_lambdas(const GainSpectrum& spec, double epsilon, bool* touched) {
    Vec lam = spec.lambdas();
    if (touched) *touched = false;
    for (int i = 0; i < lam.size(); ++i) {
        if (std::abs(std::abs(lam(i)) - 1.0) <= epsilon) {
            lam(i) = std::copysign(1.0 + 2.0 * epsilon, lam(i));
            if (touched) *touched = true;
        }
    }
    return lam;
}

double r_of_unstable(const Vec& lam, int* m_out, double* sigma_out) {
    int m = 0;
    double sigma = 0.0;
    for (int i = 0; i < lam.size(); ++i) {
        if (std::abs(lam(i)) > 1.0) {
            ++m;
            sigma += 1.0 / (lam(i) * lam(i));
        }
    }
    if (m_out) *m_out = m;
    if (sigma_out) *sigma_out = sigma;
    return (m <= 1) ? 0.0 : static_cast<double>(m - 1) / sigma;
}

}  // namespace

double threshold_r(const GainSpectrum& spec, double epsilon) {
    if (spec.dim() < 1) throw ZeroDimension("threshold needs dimension >= 1");
    const Vec lam = perturbed_lambdas(spec, epsilon, nullptr);
    return r_of_unstable(lam, nullptr, nullptr);
}

double threshold_2d(double l1, double l2) {
    if (l1 == 0.0 || l2 == 0.0) throw InvalidRange("2D threshold needs nonzero eigenvalues");
    return 1.0 / (1.0 / (l1 * l1) + 1.0 / (l2 * l2));
}

StabilityVerdict classify(const GainSpectrum& spec, double epsilon) {
    if (spec.dim() < 1) throw ZeroDimension("classification needs dimension >= 1");
    const int d = spec.dim();
    StabilityVerdict verdict;
    verdict.epsilon = epsilon;

    bool touched = false;
    const Vec lam = perturbed_lambdas(spec, epsilon, &touched);
    verdict.boundary_sensitive = touched;

    int m = 0;
    verdict.r = r_of_unstable(lam, &m, nullptr);
    verdict.m = m;

    // Unstable part of the perturbed spectrum; the descending-magnitude order
    // makes it a leading prefix.
    verdict.subsystem = GainSpectrum(lam).head(m);

    if (m == 0) {
        verdict.case_label = StabilityCase::all_stable;
        verdict.decision = Decision::stabilizable;
        return verdict;
    }

    if (m == d) {
        const TargetFractions targets = target_fractions(verdict.subsystem, 1.0);
        verdict.case_label =
            targets.all_positive() ? StabilityCase::case_1a : StabilityCase::case_1b;
        // Nonpositive targets force r >= lambda_1^2 > 1; kept as a hard check
        // in every build.
        if (verdict.case_label == StabilityCase::case_1b && !(verdict.r > 1.0 + epsilon)) {
            throw Error("internal invariant violated: nonpositive targets with r <= 1");
        }
    } else {
        verdict.case_label = StabilityCase::case_2;
    }

    if (std::abs(verdict.r - 1.0) <= epsilon) {
        verdict.case_label = StabilityCase::boundary;
        verdict.decision = (d == 2) ? Decision::stabilizable : Decision::inconclusive_at_threshold;
    } else if (verdict.r < 1.0) {
        verdict.decision = Decision::stabilizable;
    } else {
        verdict.decision = Decision::unstabilizable;
    }
    return verdict;
}

GainSpectrum subsystem_spectrum(const GainSpectrum& spec) {
    return spec.head(spec.unstable_count());
}

const char* to_string(StabilityCase c) {
    switch (c) {
        case StabilityCase::case_1a: return "case_1a";
        case StabilityCase::case_1b: return "case_1b";
        case StabilityCase::case_2: return "case_2";
        case StabilityCase::all_stable: return "all_stable";
        case StabilityCase::boundary: return "boundary";
    }
    return "unknown";
}

const char* to_string(Decision d) {
    switch (d) {
        case Decision::stabilizable: return "stabilizable";
        case Decision::unstabilizable: return "unstabilizable";
        case Decision::inconclusive_at_threshold: return "inconclusive_at_threshold";
    }
    return "unknown";
}

}  // namespace unistab
