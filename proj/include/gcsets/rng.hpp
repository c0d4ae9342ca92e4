#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>

namespace gcsets {

// splitmix64 output function (public-domain generator by Sebastiano Vigna).
// Used both as the uniform source and for deriving substream seeds, so that
// every stream is reproducible bit-for-bit from a single master seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Substream seed for a (replicate, pair, attempt) coordinate.  Depends only on
// the arguments, never on scheduling, so results are identical for any worker
// count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix64(seed + kGolden);
    s = mix64(s + kGolden * (a + 1));
    s = mix64(s + kGolden * (b + 1));
    s = mix64(s + kGolden * (c + 1));
    return s;
}

// Deterministic generator: splitmix64 stream plus Box-Muller normals.
// <random> distributions are implementation-defined, so they are avoided;
// this stream produces the same values on every platform up to libm rounding.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n) via 128-bit multiply-shift.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(next_u64()) * static_cast<unsigned __int128>(n)) >> 64);
    }

    // Standard normal via Box-Muller; consumes two uniforms per pair and
    // caches the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gcsets
