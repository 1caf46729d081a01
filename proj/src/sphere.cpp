#include "unistab/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "unistab/numerics.hpp"

namespace unistab {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id & 0xffffffffu),
                      static_cast<std::uint32_t>(stream_id >> 32)};
    eng_ = std::mt19937_64(seq);
}

double SeededRng::uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double SeededRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    have_spare_ = true;
    return u * factor;
}

ActuationDirection sample_uniform(int d, SeededRng& rng) {
    if (d < 1) throw ZeroDimension("direction dimension must be >= 1");
    Vec z(d);
    double n = 0.0;
    do {
        for (int i = 0; i < d; ++i) z(i) = rng.normal();
        n = z.norm();
    } while (n < 1e-300);
    return ActuationDirection(z / n);
}

namespace {

// Cumulative tabulation of integral_0^theta (sin t)^{d-1} dt on a 4096-point
// grid, normalized to 1 at pi, shared across calls per dimension.
struct ThetaTable {
    static constexpr int kPoints = 4096;
    std::vector<double> theta;
    std::vector<double> cdf;

    explicit ThetaTable(int d) {
        theta.resize(kPoints);
        cdf.resize(kPoints);
        const double dt = kPi / (kPoints - 1);
        for (int j = 0; j < kPoints; ++j) theta[j] = j * dt;
        cdf[0] = 0.0;
        double prev = 0.0;  // (sin 0)^{d-1}; for d = 1 the exponent is 0 and sin^0 = 1
        prev = (d == 1) ? 1.0 : 0.0;
        for (int j = 1; j < kPoints; ++j) {
            const double f = std::pow(std::sin(theta[j]), d - 1);
            cdf[j] = cdf[j - 1] + 0.5 * dt * (prev + f);
            prev = f;
        }
        const double total = cdf.back();
        for (auto& c : cdf) c /= total;
    }

    double inverse(double u) const {
        // cdf is strictly increasing wherever the density is positive; linear
        // interpolation between bracketing grid points is monotone.
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.begin()) return theta.front();
        if (it == cdf.end()) return theta.back();
        const std::size_t j = static_cast<std::size_t>(it - cdf.begin());
        const double c0 = cdf[j - 1], c1 = cdf[j];
        const double t0 = theta[j - 1], t1 = theta[j];
        if (c1 <= c0) return t0;
        return t0 + (u - c0) / (c1 - c0) * (t1 - t0);
    }
};

const ThetaTable& theta_table(int d) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<ThetaTable>> tables;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = tables[d];
    if (!slot) slot = std::make_unique<ThetaTable>(d);
    return *slot;
}

}  // namespace

double sample_theta(int d, SeededRng& rng) {
    if (d < 1) throw ZeroDimension("angle dimension must be >= 1");
    const double u = rng.uniform01();
    double t = theta_table(d).inverse(u);
    if (t >= kPi) t = std::nextafter(kPi, 0.0);  // support is [0, pi)
    return t;
}

ActuationDirection expand(const ActuationDirection& b, double theta) {
    if (!(theta >= 0.0) || !(theta < kPi)) {
        throw ThetaOutOfRange("expansion angle must lie in [0, pi)");
    }
    const int d = b.dim();
    Vec out(d + 1);
    const double s = std::sin(theta);
    out.head(d) = b.b * s;
    out(d) = std::cos(theta);
    return ActuationDirection(out / out.norm());
}

ActuationDirection project(const ActuationDirection& b, int m) {
    if (m < 1) throw ZeroDimension("projection dimension must be >= 1");
    if (m > b.dim()) throw DimensionMismatch("projection dimension exceeds direction dimension");
    const Vec headpart = b.b.head(m);
    const double n = headpart.norm();
    if (n < 1e-300) throw DegenerateProjection("leading block is numerically zero");
    return ActuationDirection(headpart / n);
}

double sphere_area(int d) {
    if (d < 2) throw InvalidRange("sphere area formula needs dimension >= 2");
    static std::vector<double> nodes, weights;
    static std::once_flag once;
    std::call_once(once, [] { numerics::gauss_legendre(256, nodes, weights); });
    double area = 2.0 * kPi;
    for (int k = 1; k <= d - 2; ++k) {
        const int power = d - k - 1;
        double integral = 0.0;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const double phi = 0.5 * kPi * (nodes[j] + 1.0);  // map [-1,1] -> [0,pi]
            integral += weights[j] * std::pow(std::sin(phi), power);
        }
        integral *= 0.5 * kPi;
        area *= integral;
    }
    return area;
}

}  // namespace unistab
