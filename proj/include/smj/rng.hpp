#pragma once

#include <cstdint>
#include <vector>

namespace smj {

/// splitmix64 finalizer. Used for seed derivation and fingerprints; callers
/// that need statistical quality should go through Rng.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Combine a seed with a stream label. Associative chains of derive() give
/// every (repetition, half, level, trial, ...) its own deterministic stream.
inline uint64_t derive(uint64_t seed, uint64_t label) {
    return mix64(seed ^ (0x2545f4914f6cdd1dull * (label + 1)));
}

/// Deterministic counter-based generator. Unlike std::uniform_int_distribution,
/// the output sequence is identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    /// Uniform value in [0, n) by rejection; exact, no modulo bias.
    uint64_t below(uint64_t n) {
        uint64_t threshold = -n % n;  // 2^64 mod n
        for (;;) {
            uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    double real() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform value in [lo, hi).
    double real(double lo, double hi) { return lo + (hi - lo) * real(); }

    /// Uniform m-subset of [0, n), returned sorted. Partial Fisher-Yates over
    /// a sparse map would be faster for m << n; at the sizes used here the
    /// dense swap array is simpler and cheap.
    std::vector<uint32_t> sorted_subset(uint64_t n, uint64_t m);

    /// Uniform m-subset of the given (sorted, distinct) population, sorted.
    std::vector<uint32_t> sorted_subset_of(const std::vector<uint32_t>& population, uint64_t m);

private:
    uint64_t state_;
};

}  // namespace smj
