#pragma once

#include <cmath>
#include <cstdint>

namespace affine {

/// SplitMix64 generator with derived streams. Stream i of seed s starts from
/// state mix(s + K*(i+1)) with K = 0x632be59bd9b4e019; successive outputs are
/// standard SplitMix64 steps. Everything is integer arithmetic on uint64, so
/// the draw sequence is identical on every platform. Monte Carlo drivers give
/// path i the stream (seed, i), which makes results independent of how paths
/// are scheduled across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed + 0x632be59bd9b4e019ull * (stream + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix_final(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Inverse-CDF exponential draw; 1 - U lies in (0, 1], so the log is
    /// always finite.
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

private:
    static std::uint64_t mix_final(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix(std::uint64_t z) {
        return mix_final(z + 0x9e3779b97f4a7c15ull);
    }

    std::uint64_t state_;
};

} // namespace affine
