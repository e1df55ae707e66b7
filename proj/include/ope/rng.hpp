#pragma once

#include <array>
#include <cstdint>

namespace ope {

/// SplitMix64 finalizer; bijective 64-bit mixing.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the independent stream for (replication, unit) under a master seed.
/// Streams do not depend on the order in which they are requested.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replication,
                                    std::uint64_t unit = 0) noexcept {
    std::uint64_t s = mix64(master);
    s = mix64(s ^ (replication * 0xd1b54a32d192ed03ULL));
    s = mix64(s ^ (unit * 0x8cb92ba72f3d8dd7ULL));
    return s;
}

/**
 * xoshiro256** generator with its own uniform and Gaussian draws, so the
 * sequence of variates is bit-identical across standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Standard normal via the polar method; the second variate is cached.
    double normal() noexcept;

    double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

    /// Normal(mean, sd) conditioned on >= lower, by rejection from the untruncated law.
    double truncated_normal(double mean, double sd, double lower) noexcept;

private:
    std::array<std::uint64_t, 4> s_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace ope
