#pragma once

#include <cstdint>
#include <string_view>

namespace mtpose {

/// SplitMix64 generator. Every reproducible random decision in the harness
/// (degrader failures, keypoint noise) is drawn from this generator so that
/// identical seeds give bit-identical streams on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 significant bits. Exact: the value is
    /// an integer below 2^53 times a power of two.
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi], inclusive.
    int64_t next_in(int64_t lo, int64_t hi) {
        const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next() % span);
    }

private:
    uint64_t state_;
};

/// FNV-1a hash, used to derive per-case substreams from string ids.
inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x00000100000001b3ULL;
    }
    return h;
}

}  // namespace mtpose
