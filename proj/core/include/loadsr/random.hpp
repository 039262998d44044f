#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace loadsr {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-task seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31U);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts) noexcept
{
    auto s = mix_seed(base);
    for (auto salt : salts) {
        s = mix_seed(s ^ mix_seed(salt));
    }
    return s;
}

// Uniform double in [lo, hi) built from raw bits so streams are identical across standard libraries.
inline double uniform(Rng& rng, double lo, double hi)
{
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^-53
    double u = static_cast<double>(rng() >> 11U) * scale;
    return lo + (hi - lo) * u;
}

} // namespace loadsr

namespace loadsr {

// Box-Muller standard normal (one draw per call).
inline double gaussian(Rng& rng)
{
    constexpr double two_pi = 6.283185307179586476925;
    double u1 = 1.0 - uniform(rng, 0.0, 1.0); // (0, 1]
    double u2 = uniform(rng, 0.0, 1.0);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace loadsr
