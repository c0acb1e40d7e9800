#pragma once

#include <cstdint>

namespace tw {

// SplitMix64 (Steele, Lea, Vigna). Chosen over std engines because the
// bounded-draw mapping below is fully specified, so streams reproduce
// bit-for-bit across standard libraries and platforms.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n) via 128-bit multiply-shift (Lemire, unbiased
    // enough for n << 2^64 and exactly reproducible).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Independent child stream; distinct ids give decorrelated sequences.
    SplitMix64 fork(std::uint64_t stream_id) {
        SplitMix64 mix(state_ ^ (0x632be59bd9b4e019ULL * (stream_id + 1)));
        return SplitMix64(mix.next_u64());
    }

    static constexpr const char* name() { return "splitmix64"; }

private:
    std::uint64_t state_;
};

}  // namespace tw
