/// \file rng.hpp
/// \brief Single seeded pseudorandom source for all randomized audits.
///
/// The uniform/normal mappings are written out explicitly (rather than using
/// std::uniform_real_distribution etc.) because the standard distributions
/// are not bit-reproducible across standard library implementations, and the
/// CLI contract demands byte-identical outputs for identical config + seed.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace oscillab {

/// Deterministic RNG: mt19937_64 engine + fixed output mappings.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (deterministic, no cached spare).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // Guard against log(0).
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Rejection-free modulo is fine here: audits never need exact
        // equidistribution beyond ~2^-40 bias.
        return eng_() % n;
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

} // namespace oscillab
