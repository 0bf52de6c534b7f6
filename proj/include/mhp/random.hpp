// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "mhp/linalg.hpp"

namespace mhp {

/// SplitMix64 finalizer (Steele, Lea, Flood). Used for seeding and for
/// deriving per-realization seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Avalanche-mixes an ordered list of words into one seed:
/// h = splitmix64(h ^ w) folded left over the words, starting from the first.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) noexcept;

/// Random stream with a fully specified bit-level algorithm:
/// std::mt19937_64 seeded with splitmix64(seed); uniforms are the top 53 bits
/// scaled by 2^-53; normals come from Box-Muller (both outputs are used, in
/// order cos then sin). Does not depend on the standard library's
/// implementation-defined distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard real normal.
    double normal();
    /// Standard circularly-symmetric complex normal, CN(0, 1): real and
    /// imaginary parts are two consecutive normals scaled by 1/sqrt(2).
    cdouble complex_normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace mhp
