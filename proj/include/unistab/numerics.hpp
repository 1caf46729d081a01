#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "unistab/errors.hpp"

namespace unistab::numerics {

namespace detail {
// 15-point Kronrod nodes (positive half) and weights, with the embedded
// 7-point Gauss weights, on [-1, 1].
inline constexpr double kGk15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGk15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGk15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15_panel(F&& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    for (int j = 0; j < 8; ++j) {
        const double dx = hw * kGk15Nodes[j];
        double fsum;
        if (j == 7) {
            fsum = f(c);
        } else {
            fsum = f(c - dx) + f(c + dx);
        }
        resk += kGk15WeightsK[j] * fsum;
        if (j % 2 == 1) resg += kGk15WeightsG[j / 2] * fsum;
    }
    kronrod = resk * hw;
    err = std::abs((resk - resg) * hw);
}
}  // namespace detail

// Adaptive Gauss-Kronrod 15(7) quadrature on [a, b]: bisects the interval
// with the worst error estimate until the summed estimate meets
// max(abs_tol, rel_tol * |integral|) or the interval budget runs out.
template <class F>
double integrate_gk15(F&& f, double a, double b, double abs_tol = 1e-13, double rel_tol = 1e-12,
                      int max_intervals = 4000) {
    struct Interval {
        double a, b, value, err;
    };
    std::vector<Interval> intervals;
    intervals.reserve(256);
    Interval first{a, b, 0.0, 0.0};
    detail::gk15_panel(f, a, b, first.value, first.err);
    intervals.push_back(first);
    while (static_cast<int>(intervals.size()) < max_intervals) {
        double total = 0.0, total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            total += intervals[i].value;
            total_err += intervals[i].err;
            if (intervals[i].err > intervals[worst].err) worst = i;
        }
        if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
        Interval cur = intervals[worst];
        const double mid = 0.5 * (cur.a + cur.b);
        if (mid <= cur.a || mid >= cur.b) break;  // interval at roundoff width
        Interval left{cur.a, mid, 0.0, 0.0}, right{mid, cur.b, 0.0, 0.0};
        detail::gk15_panel(f, left.a, left.b, left.value, left.err);
        detail::gk15_panel(f, right.a, right.b, right.value, right.err);
        intervals[worst] = left;
        intervals.push_back(right);
    }
    double total = 0.0;
    for (const auto& iv : intervals) total += iv.value;
    return total;
}

// n-point Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on
// the Legendre recurrence).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Regularized incomplete beta function I_x(a, b) for a, b >= 0.5, evaluated by
// quadrature after the substitution x = sin^2(phi), which removes the
// endpoint singularities for half-integer shape parameters.
double incomplete_beta_cdf(double a, double b, double x);

// Inverse of incomplete_beta_cdf in x, by bisection.
double beta_quantile(double a, double b, double u);

}  // namespace unistab::numerics
