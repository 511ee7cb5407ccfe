#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gkit {

/// Deterministic 64-bit generator (splitmix64 state walk).
///
/// All randomness in the library flows from a single user seed through
/// named sub-streams, so e.g. adding SDP restarts never perturbs the
/// samples drawn by earlier restarts.  The stream is fully specified
/// here rather than delegated to std::*_distribution, whose output is
/// implementation-defined; identical seeds give identical bits on any
/// platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1], safe as a log() argument.
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (one value per call; the twin is cached).
    double next_gaussian();

    /// +1.0 or -1.0 with equal probability.
    double next_sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

    /// Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // modulo bias is irrelevant at the sizes used here (n << 2^64)
        return next_u64() % n;
    }

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

inline double Rng::next_gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Box-Muller on open-interval uniforms
    const double u1 = next_double_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

namespace detail {

/// FNV-1a over a stream-name string, used to key sub-streams.
inline std::uint64_t hash_name(std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Sub-stream generator: (seed, "stream-name", index) -> independent Rng.
inline Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return Rng(detail::mix(detail::mix(seed, detail::hash_name(name)), index));
}

} // namespace gkit
