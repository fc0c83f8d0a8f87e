#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace psw {

/// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive
/// decorrelated substream seeds from (seed, purpose, index) triples.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Purpose tags keep substreams for different engine stages disjoint even
/// when they share a user seed and an index.
namespace stream {
inline constexpr std::uint64_t bootstrap = 0x626f6f74ULL;
inline constexpr std::uint64_t mc_data = 0x6d636461ULL;
inline constexpr std::uint64_t truth = 0x74727574ULL;
inline constexpr std::uint64_t generic = 0x67656e65ULL;
}  // namespace stream

/// Seeded random stream with the few explicit draws the engines need.
///
/// The generator is std::mt19937_64 (bit-exact across platforms) and every
/// distribution here is implemented explicitly so a (seed, purpose, index)
/// triple always yields the same draw sequence regardless of standard
/// library or thread schedule.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index)
        : gen_(mix64(mix64(seed ^ mix64(purpose)) ^ mix64(index))) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1].
    double uniform_pos() { return 1.0 - uniform(); }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Pair of independent standard normals from one Box-Muller transform.
    std::pair<double, double> normal_pair() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * std::numbers::pi * u2),
                r * std::sin(2.0 * std::numbers::pi * u2)};
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform index in [0, n). Bias is O(n / 2^53), negligible for any
    /// dataset this engine handles.
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n));
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace psw
