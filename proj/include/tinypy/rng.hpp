#ifndef TINYPY_RNG_HPP
#define TINYPY_RNG_HPP

#include <cassert>
#include <cstdint>
#include <span>

namespace tinypy {

// Seedable pseudo-random stream used for every random decision in the
// generator. The algorithm is part of the output contract: a corpus produced
// from a given seed must be byte-identical on every platform, so we fix
// splitmix64 (Vigna's fixed-increment variant of Java's SplittableRandom)
// rather than delegating to implementation-defined std engines. All bounded
// and weighted draws below are pure 64/128-bit integer arithmetic for the
// same reason.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform draw in [0, n). Lemire's multiply-reject method; exact, no
    // modulo bias. n must be nonzero.
    uint64_t bounded(uint64_t n) {
        assert(n != 0);
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    // Draw an index with probability weights[i] / sum(weights).
    // Sum must be positive and must not overflow uint64.
    size_t weighted(std::span<const uint64_t> weights) {
        uint64_t total = 0;
        for (uint64_t w : weights) total += w;
        assert(total > 0);
        uint64_t r = bounded(total);
        uint64_t acc = 0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (r < acc) return i;
        }
        return weights.size() - 1;  // unreachable
    }

    // Independent stream for a (seed, index) pair. Used by the corpus
    // pipeline: attempt i always draws from split(seed, i), so results do
    // not depend on how attempts are distributed over worker threads.
    static SplitMix64 split(uint64_t seed, uint64_t index) {
        return SplitMix64(mix(seed + 0xD1B54A32D192ED03ull * (index + 1)));
    }

private:
    // splitmix64 output function; used as a bijective scrambler by split().
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

}  // namespace tinypy

#endif  // TINYPY_RNG_HPP
