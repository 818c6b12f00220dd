#pragma once

#include <cstdint>

namespace reliance {

/// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// World seed for (base seed, strategy ordinal, replication index):
///   s0 = mix64(base)
///   s1 = mix64(s0 ^ (ordinal * 0x9E3779B97F4A7C15))
///   s  = mix64(s1 ^ ((replication + 1) * 0xD1B54A32D192ED03))
/// Stable across releases; any change is a breaking change to outputs.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t ordinal,
                                    std::uint64_t replication) noexcept {
    std::uint64_t s = mix64(base_seed);
    s = mix64(s ^ (ordinal * 0x9E3779B97F4A7C15ULL));
    return mix64(s ^ ((replication + 1) * 0xD1B54A32D192ED03ULL));
}

/// SplitMix64 stream. uniform() is on [0, 1) with 53 random bits.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform(double lo, double hi) noexcept { return lo + uniform() * (hi - lo); }

private:
    std::uint64_t state_;
};

}  // namespace reliance
