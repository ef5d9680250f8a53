#pragma once

#include <cmath>
#include <cstdint>

namespace rss {

/// Counter-based generator: each draw mixes (seed, stream, counter) through
/// the SplitMix64 finalizer twice. Draws are a pure function of the triple,
/// so streams can be split freely.
///
/// Stream-split rule used throughout the library:
///   stream = iteration index k for per-iteration sketches (one independent
///   stream per iteration, as the framework's truth analysis requires),
///   stream = trial index for Monte-Carlo drivers.
class Rng {
public:
    Rng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    uint64_t next_u64() {
        uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (counter_++ + 1);
        z ^= stream_ + 0xbf58476d1ce4e5b9ULL;
        z = mix(z);
        z = mix(z + stream_);
        return z;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    uint64_t next_below(uint64_t n) {
        // Rejection to avoid modulo bias.
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller (deterministic across platforms).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = next_double();
        } while (u1 <= 0.0);
        u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// +1 or -1 with equal probability.
    double next_sign() { return (next_u64() & 1u) ? 1.0 : -1.0; }

private:
    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Derive a child seed for (seed, index) pairs, for per-trial reproducibility.
inline uint64_t derive_seed(uint64_t seed, uint64_t index) {
    Rng r(seed, index);
    return r.next_u64();
}

} // namespace rss
