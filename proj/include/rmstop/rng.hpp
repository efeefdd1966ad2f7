#pragma once

#include <cstdint>

namespace rmstop {

// splitmix64 finalizer; also used as the seed-mixing hash for parallel streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stable stream-seed derivation: hash chain over (master, a, b, c).
// Replication j of cell c in study s draws from derive_seed(master, s, c, j),
// so results do not depend on thread count or scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a = 0,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

/**
 * Deterministic splitmix64 generator.
 *
 * All draws are derived from 53-bit uniforms; normals use the inverse CDF so
 * sequences are identical across platforms and standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1), never exactly 0 or 1; safe for quantile transforms.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal();              // inverse-CDF transform of uniform_open()
    long poisson(double lambda);  // CDF inversion; intended for small/moderate rates

private:
    std::uint64_t state_;
};

} // namespace rmstop
