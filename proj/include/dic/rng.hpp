#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dic {

// SplitMix64: tiny deterministic generator with well-scrambled seeding.
// Used everywhere a reproducible stream is required, so that outputs do not
// depend on standard-library distribution internals.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (one value per call, second discarded).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    uint64_t state_;
};

// Derives an independent stream from a base seed and a stream id.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    SplitMix64 rng(base ^ (stream * 0xd6e8feb86659fd93ull));
    return rng.next();
}

}  // namespace dic
