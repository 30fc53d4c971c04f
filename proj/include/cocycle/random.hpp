#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace cocycle {

// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based seed splitting: the i-th child of `master` in stream `stream`.
// Children of distinct (stream, index) pairs are decorrelated.
constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream,
                                   std::uint64_t index) noexcept {
    return mix64(mix64(master ^ mix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

// Uniform double in [0, 1) from the top 53 bits of a word.
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Thin wrapper around mt19937_64 whose derived draws do not depend on the
// standard library's distribution implementations, so results are identical
// across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform01() { return to_unit_interval(engine_()); }

    // Uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % bound;
    }

    // Uniform integer in [lo, hi].
    long between(long lo, long hi) {
        return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool coin(double p = 0.5) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace cocycle
