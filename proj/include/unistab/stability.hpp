#pragma once

#include "unistab/core.hpp"

namespace unistab {

enum class StabilityCase { case_1a, case_1b, case_2, all_stable, boundary };
enum class Decision { stabilizable, unstabilizable, inconclusive_at_threshold };

struct StabilityVerdict {
    double r = 0.0;  // (m-1) / sum of lambda^{-2} over the unstable part; 0 when m <= 1
    int m = 0;       // count of |lambda| > 1 (after boundary perturbation)
    StabilityCase case_label = StabilityCase::all_stable;
    Decision decision = Decision::stabilizable;
    GainSpectrum subsystem;          // the unstable part (as used for r)
    bool boundary_sensitive = false; // some |lambda| was within epsilon of 1
    double epsilon = 1e-9;
};

// r = (m-1)/sum_{|lambda|>1} lambda^{-2}; r = 0 when m <= 1. Entries with
// ||lambda|-1| <= epsilon are first perturbed outward to magnitude 1+2*epsilon
// (counted unstable), matching classify.
double threshold_r(const GainSpectrum& spec, double epsilon = 1e-9);

// All-eigenvalue 2D threshold (1/l1^2 + 1/l2^2)^{-1}. Includes stable
// eigenvalues by design; for two unstable eigenvalues it coincides with
// threshold_r, and when either |l| < 1 it is automatically < 1, so the two
// thresholds never disagree about stabilizability.
double threshold_2d(double l1, double l2);

// Full case analysis. Decision: stabilizable iff r < 1, unstabilizable iff
// r > 1; within epsilon of r = 1 the verdict is stabilizable for d = 2 (the 2D
// threshold is an if-and-only-if) and inconclusive_at_threshold for d > 2, and
// the case label becomes boundary. case_1a: all entries unstable with all
// target fractions positive; case_1b: all unstable otherwise (r > 1 is then
// asserted); case_2: mixed stable/unstable with m >= 1; all_stable: m = 0
// (r = 0, zero control suffices).
StabilityVerdict classify(const GainSpectrum& spec, double epsilon = 1e-9);

// Leading unstable part (strict |lambda| > 1), order preserved. May be empty.
GainSpectrum subsystem_spectrum(const GainSpectrum& spec);

const char* to_string(StabilityCase c);
const char* to_string(Decision d);

}  // namespace unistab
