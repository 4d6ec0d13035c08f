#pragma once

// Seeded generators for the property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "d2drobust/channel_model.hpp"

namespace d2d::gen {

inline std::mt19937_64 rng_for(std::uint64_t seed) { return std::mt19937_64(seed * 0x9E3779B97F4A7C15ULL + 17); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec2 random_vec(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return {n(rng), n(rng)};
}

/// Correlated, skewed cloud of n points: squared Gaussians plus an offset, as in the CSI model.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const double rho = uniform(rng, -0.8, 0.8);
    const Vec2 offset(uniform(rng, 0.5, 3.0), uniform(rng, 0.5, 3.0));
    const Vec2 scale(uniform(rng, 0.3, 2.0), uniform(rng, 0.3, 2.0));
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = n01(rng);
        const double z2 = rho * z1 + std::sqrt(1 - rho * rho) * n01(rng);
        ds.samples.push_back({offset.x() + scale.x() * z1 * z1, offset.y() + scale.y() * z2 * z2});
    }
    return ds;
}

/// Plain Gaussian cloud with a random covariance.
inline Dataset gaussian_cloud(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> n01(0.0, 1.0);
    const double rho = uniform(rng, -0.7, 0.7);
    const Vec2 centre = random_vec(rng, 3.0);
    const Vec2 scale(uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0));
    Dataset ds;
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = n01(rng);
        const double z2 = rho * z1 + std::sqrt(1 - rho * rho) * n01(rng);
        ds.samples.push_back({centre.x() + scale.x() * z1, centre.y() + scale.y() * z2});
    }
    return ds;
}

inline std::vector<Vec2> points_of(const Dataset& ds) {
    std::vector<Vec2> out;
    for (const ChannelSample& s : ds.samples) out.push_back(s.vec());
    return out;
}

}  // namespace d2d::gen
