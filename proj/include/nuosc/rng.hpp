#pragma once

#include <cstdint>

// Portable pseudorandom generator. Standard-library distributions are not
// bit-reproducible across implementations, and reproducibility is part of
// this library's contract, so sampling is built on a fixed algorithm:
// xoshiro256** (Blackman & Vigna) seeded through splitmix64.

namespace nuosc {

inline std::uint64_t splitmix64_next(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix64_next(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53-bit resolution; bit-identical on any platform
    // with IEEE doubles.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    std::uint64_t s_[4];
};

// Shot k of a run seeded with s draws from Rng(s + k). Each shot owns its
// stream, so shot order or parallel execution cannot change sampled results.
inline Rng shot_rng(std::uint64_t seed, std::uint64_t shot) { return Rng(seed + shot); }

// Derives an independent named stream from a base seed, for runs that need
// several uncorrelated sampling contexts (scan points, noise injection,
// calibration) without overlapping the per-shot seed arithmetic.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
    return splitmix64_next(x);
}

}  // namespace nuosc
