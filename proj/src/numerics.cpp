#include "unistab/numerics.hpp"

#include <cmath>

namespace unistab::numerics {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw InvalidRange("Gauss-Legendre node count must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const double pi = std::acos(-1.0);
    const int half = (n + 1) / 2;
    for (int k = 0; k < half; ++k) {
        // Tricomi-style initial guess, then Newton on the recurrence.
        double x = std::cos(pi * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        // One clean evaluation of P'_n at the converged node.
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= n; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
}

double incomplete_beta_cdf(double a, double b, double x) {
    if (!(a >= 0.5) || !(b >= 0.5)) {
        throw InvalidRange("incomplete beta implemented for shape parameters >= 0.5");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    const double norm = 2.0 * std::exp(-log_beta);
    const double phi_x = std::asin(std::sqrt(x));
    // x = sin^2(phi): the density becomes norm * sin^{2a-1} * cos^{2b-1},
    // smooth on [0, pi/2] for a, b >= 1/2.
    auto density = [&](double phi) {
        const double s = std::sin(phi);
        const double c = std::cos(phi);
        return norm * std::pow(s, 2.0 * a - 1.0) * std::pow(c, 2.0 * b - 1.0);
    };
    const double v = integrate_gk15(density, 0.0, phi_x, 1e-14, 1e-13);
    return std::min(1.0, std::max(0.0, v));
}

double beta_quantile(double a, double b, double u) {
    if (!(u > 0.0) || !(u < 1.0)) throw InvalidRange("beta quantile needs u in (0,1)");
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-15; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (incomplete_beta_cdf(a, b, mid) < u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace unistab::numerics
