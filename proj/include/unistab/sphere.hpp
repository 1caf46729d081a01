#pragma once

#include <cstdint>
#include <random>

#include "unistab/core.hpp"

namespace unistab {

// Deterministic random stream: the same (seed, stream_id) pair produces the
// identical sample sequence on every platform (mt19937_64 is bit-exact by
// the standard; the uniform and normal mappings below are implemented here
// rather than taken from the implementation-defined std distributions).
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform01();
    // Standard normal via the Marsaglia polar method.
    double normal();

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Uniform direction on the d-dimensional hypersphere: d standard normals,
// normalized (resampling the measure-zero all-zero draw).
ActuationDirection sample_uniform(int d, SeededRng& rng);

// Polar angle with density proportional to (sin theta)^{d-1} on [0, pi),
// via inverse CDF on a 4096-point tabulation (cached per dimension).
double sample_theta(int d, SeededRng& rng);

// (b_1 sin t, ..., b_d sin t, cos t): lifts a uniform direction on S_d plus
// an independent polar angle to a uniform direction on S_{d+1}.
ActuationDirection expand(const ActuationDirection& b, double theta);

// First m coordinates, renormalized; uniform input yields uniform output.
ActuationDirection project(const ActuationDirection& b, int m);

// Surface area of S_d via the product-of-integrals formula
// 2*pi * prod_{k=1}^{d-2} integral_0^pi (sin phi)^{d-k-1} dphi,
// each factor by 256-node Gauss-Legendre quadrature. Requires d >= 2.
double sphere_area(int d);

}  // namespace unistab
