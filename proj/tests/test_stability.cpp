#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "unistab/stability.hpp"

using namespace unistab;

TEST_CASE("threshold rate for two unstable modes") {
    CHECK(std::abs(threshold_r(GainSpectrum{1.1, 2.4}) - 0.99994261119081779) <= 1e-12);
    CHECK(std::abs(threshold_r(GainSpectrum{1.3, 2.4}) - 1.3066308724832215) <= 1e-12);
    CHECK(std::abs(threshold_r(GainSpectrum{1.2, 1.5}) - 0.87804878048780488) <= 1e-12);
}

TEST_CASE("threshold rate ignores stable modes and vanishes for m at most one") {
    CHECK(threshold_r(GainSpectrum{3.0}) == 0.0);
    CHECK(threshold_r(GainSpectrum{3.0, 0.2}) == 0.0);
    CHECK(threshold_r(GainSpectrum{0.5, 0.9}) == 0.0);
    CHECK(std::abs(threshold_r(GainSpectrum{0.5, 0.5, 1.5, 1.5}) - 1.125) <= 1e-12);
    CHECK(threshold_r(GainSpectrum{2.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("all eigenvalue two dimensional threshold") {
    const double s = std::sqrt(2.0);
    CHECK(std::abs(threshold_2d(s, s) - 1.0) <= 1e-12);
    CHECK(std::abs(threshold_2d(1.1, 2.4) - 0.99994261119081779) <= 1e-12);
    // Includes stable eigenvalues by design.
    CHECK(threshold_2d(3.0, 0.5) < 1.0);
}

TEST_CASE("the two thresholds never disagree about two dimensional stabilizability") {
    for (int i = 0; i < 50; ++i) {
        for (int j = 0; j < 50; ++j) {
            const double l1 = 0.1 + 3.9 * i / 49.0;
            const double l2 = 0.1 + 3.9 * j / 49.0;
            const double r2 = threshold_2d(l1, l2);
            if (std::abs(r2 - 1.0) <= 1e-9) continue;
            const StabilityVerdict v = classify(GainSpectrum{l1, l2});
            CHECK((r2 < 1.0) == (v.decision == Decision::stabilizable));
        }
    }
}

TEST_CASE("classification of a fully unstable pair") {
    StabilityVerdict v = classify(GainSpectrum{1.5, 2.0});
    CHECK(v.case_label == StabilityCase::case_1a);
    CHECK(std::abs(v.r - 1.44) <= 1e-12);
    CHECK(v.m == 2);
    CHECK(v.decision == Decision::unstabilizable);
    CHECK_FALSE(v.boundary_sensitive);
    REQUIRE(v.subsystem.dim() == 2);
    CHECK(v.subsystem[0] == 2.0);
    CHECK(v.subsystem[1] == 1.5);
}

TEST_CASE("classification with a negative target is case 1b and provably unstable") {
    StabilityVerdict v = classify(GainSpectrum{1.05, 2.0, 2.0});
    CHECK(v.case_label == StabilityCase::case_1b);
    CHECK(std::abs(v.r - 1.4214343271555197) <= 1e-12);
    CHECK(v.decision == Decision::unstabilizable);
    // Dropping the weak mode leaves (2, 2), itself above threshold.
    CHECK(threshold_r(GainSpectrum{2.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("case 1b always implies a rate above one") {
    std::mt19937_64 eng(73);
    std::uniform_real_distribution<double> weak(1.01, 1.1);
    std::uniform_real_distribution<double> strong(2.0, 5.0);
    int seen = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const int d = 3 + static_cast<int>(eng() % 2);
        Vec l(d);
        l(0) = weak(eng);
        for (int i = 1; i < d; ++i) l(i) = strong(eng);
        StabilityVerdict v = classify(GainSpectrum(l));
        if (v.case_label == StabilityCase::case_1b) {
            ++seen;
            CHECK(v.r > 1.0);
            CHECK(v.decision == Decision::unstabilizable);
        }
    }
    CHECK(seen > 0);
}

TEST_CASE("mixed spectra are case 2") {
    StabilityVerdict v = classify(GainSpectrum{1.1, 2.4, 0.5});
    CHECK(v.case_label == StabilityCase::case_2);
    CHECK(v.m == 2);
    CHECK(std::abs(v.r - 0.99994261119081779) <= 1e-12);
    CHECK(v.decision == Decision::stabilizable);
    REQUIRE(v.subsystem.dim() == 2);
    CHECK(v.subsystem[0] == 2.4);
    CHECK(v.subsystem[1] == 1.1);

    StabilityVerdict single = classify(GainSpectrum{3.0, 0.2});
    CHECK(single.case_label == StabilityCase::case_2);
    CHECK(single.r == 0.0);
    CHECK(single.decision == Decision::stabilizable);
}

TEST_CASE("all stable spectra need no control") {
    StabilityVerdict v = classify(GainSpectrum{0.5, 0.9});
    CHECK(v.case_label == StabilityCase::all_stable);
    CHECK(v.m == 0);
    CHECK(v.r == 0.0);
    CHECK(v.decision == Decision::stabilizable);
    CHECK(v.subsystem.dim() == 0);
}

TEST_CASE("unit magnitude eigenvalues are perturbed outward and flagged") {
    StabilityVerdict v = classify(GainSpectrum{1.0, 0.5});
    CHECK(v.boundary_sensitive);
    CHECK(v.m == 1);
    CHECK(v.r == 0.0);
    CHECK(v.decision == Decision::stabilizable);

    StabilityVerdict both = classify(GainSpectrum{1.0, -1.0});
    CHECK(both.boundary_sensitive);
    CHECK(both.m == 2);
    CHECK(std::abs(both.r - 0.5) <= 1e-6);
    CHECK(both.decision == Decision::stabilizable);
}

TEST_CASE("rates within epsilon of one are boundary cases") {
    const double s = std::sqrt(2.0);
    StabilityVerdict two = classify(GainSpectrum{s, s});
    CHECK(two.case_label == StabilityCase::boundary);
    CHECK(two.decision == Decision::stabilizable);

    const double t = std::sqrt(1.5);
    StabilityVerdict three = classify(GainSpectrum{t, t, t});
    CHECK(three.case_label == StabilityCase::boundary);
    CHECK(three.decision == Decision::inconclusive_at_threshold);
}

TEST_CASE("subsystem spectrum keeps the strictly unstable prefix") {
    GainSpectrum sub = subsystem_spectrum(GainSpectrum{2.0, 1.5, 0.5});
    REQUIRE(sub.dim() == 2);
    CHECK(sub[0] == 2.0);
    CHECK(sub[1] == 1.5);

    CHECK(subsystem_spectrum(GainSpectrum{0.3, 0.7}).dim() == 0);

    GainSpectrum all = subsystem_spectrum(GainSpectrum{1.5, 1.5, 1.5});
    CHECK(all.dim() == 3);
}

TEST_CASE("rate is monotone in unstable magnitudes") {
    std::mt19937_64 eng(79);
    std::uniform_real_distribution<double> lam(1.05, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
        const int d = 2 + static_cast<int>(eng() % 3);
        Vec l(d);
        for (int i = 0; i < d; ++i) l(i) = lam(eng);
        const double base = threshold_r(GainSpectrum(l));
        Vec bumped = l;
        bumped(static_cast<int>(eng() % d)) *= 1.05;
        CHECK(threshold_r(GainSpectrum(bumped)) >= base - 1e-12);
    }
}

TEST_CASE("classification is invariant under sign flips") {
    std::mt19937_64 eng(83);
    std::uniform_real_distribution<double> lam(0.3, 3.0);
    for (int rep = 0; rep < 30; ++rep) {
        const int d = 2 + static_cast<int>(eng() % 3);
        Vec l(d);
        for (int i = 0; i < d; ++i) l(i) = lam(eng);
        StabilityVerdict plus = classify(GainSpectrum(l));
        StabilityVerdict minus = classify(GainSpectrum(Vec(-l)));
        CHECK(plus.r == minus.r);
        CHECK(plus.m == minus.m);
        CHECK(plus.case_label == minus.case_label);
        CHECK(plus.decision == minus.decision);
    }
}

TEST_CASE("paired four dimensional boundary behavior") {
    // For (l1, l1, l2, l2) with all four unstable the threshold curve is
    // l2* = sqrt(2 l1^2 / (3 l1^2 - 2)).
    const double l1 = 1.2;
    const double l2s = std::sqrt(2.0 * l1 * l1 / (3.0 * l1 * l1 - 2.0));
    CHECK(classify(GainSpectrum{l1, l1, l2s - 0.01, l2s - 0.01}).decision ==
          Decision::stabilizable);
    CHECK(classify(GainSpectrum{l1, l1, l2s + 0.01, l2s + 0.01}).decision ==
          Decision::unstabilizable);
    // Any magnitude above sqrt(2) makes the paired system unstabilizable.
    CHECK(classify(GainSpectrum{1.5, 1.5, 1.01, 1.01}).decision == Decision::unstabilizable);
    CHECK(classify(GainSpectrum{1.5, 1.5, 0.5, 0.5}).decision == Decision::unstabilizable);
}

TEST_CASE("labels render as strings") {
    CHECK(std::string(to_string(StabilityCase::case_1a)) == "case_1a");
    CHECK(std::string(to_string(StabilityCase::case_1b)) == "case_1b");
    CHECK(std::string(to_string(StabilityCase::case_2)) == "case_2");
    CHECK(std::string(to_string(StabilityCase::all_stable)) == "all_stable");
    CHECK(std::string(to_string(StabilityCase::boundary)) == "boundary");
    CHECK(std::string(to_string(Decision::stabilizable)) == "stabilizable");
    CHECK(std::string(to_string(Decision::unstabilizable)) == "unstabilizable");
    CHECK(std::string(to_string(Decision::inconclusive_at_threshold)) ==
          "inconclusive_at_threshold");
}

TEST_CASE("classification rejects the empty spectrum") {
    CHECK_THROWS_AS(classify(GainSpectrum()), ZeroDimension);
    CHECK_THROWS_AS(threshold_r(GainSpectrum()), ZeroDimension);
}
