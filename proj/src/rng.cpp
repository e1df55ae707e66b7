#include "ope/rng.hpp"

#include <cmath>

namespace ope {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) noexcept {
    std::uint64_t z = seed;
    for (auto& word : s_) {
        word = mix64(z);
        z += 0x9e3779b97f4a7c15ULL;
    }
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::normal() noexcept {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    double u, v, r2;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(r2) / r2);
    cached_ = v * scale;
    has_cached_ = true;
    return u * scale;
}

double Rng::truncated_normal(double mean, double sd, double lower) noexcept {
    if (sd <= 0.0) {
        return mean >= lower ? mean : lower;
    }
    for (;;) {
        const double draw = normal(mean, sd);
        if (draw >= lower) {
            return draw;
        }
    }
}

} // namespace ope
