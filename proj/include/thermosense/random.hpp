#pragma once

// Deterministic random streams.
//
// std::mt19937_64 is fully specified by the standard, the std:: distributions
// are not, so variates are derived here from raw engine output. Every
// consumer derives its own engine from (seed, stream index) so results do not
// depend on generation order.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace thermosense {

using Engine = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline Engine make_stream(std::uint64_t seed, std::uint64_t index) {
    return Engine(splitmix64(splitmix64(seed) ^ splitmix64(~index)));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(Engine& eng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(eng);
}

/// Box-Muller; one variate per call.
inline double standard_normal(Engine& eng) {
    const double u1 = 1.0 - uniform01(eng);  // (0, 1]
    const double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [0, n), rejection-sampled (no modulo bias).
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
    const std::uint64_t limit = Engine::max() - Engine::max() % n;
    std::uint64_t v;
    do {
        v = eng();
    } while (v >= limit);
    return v % n;
}

/// Fisher-Yates with uniform_index, identical on every platform.
template <typename T>
void shuffle(std::span<T> items, Engine& eng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(eng, i));
        std::swap(items[i - 1], items[j]);
    }
}

}  // namespace thermosense
