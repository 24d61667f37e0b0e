#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "apkit/vector.hpp"

namespace apkit {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent child seeds from (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform direction on the unit sphere of R^dim.
inline Vector random_unit(Rng& rng, std::size_t dim) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (;;) {
        Vector g(dim);
        for (double& v : g) v = gauss(rng);
        if (norm(g) > 1e-12) return normalize(g);
    }
}

/// Uniform point of the closed ball of given radius in R^dim.
inline Vector random_in_ball(Rng& rng, std::size_t dim, double radius) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim));
    return r * random_unit(rng, dim);
}

}  // namespace apkit
