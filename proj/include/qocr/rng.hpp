#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace qocr {

// SplitMix64 finalizer; also used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed of the sub-stream identified by `key` under `seed`. Streams for different
// keys are independent, so per-record work can run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept {
    return mix64(seed ^ mix64(key + 0x9E3779B97F4A7C15ULL));
}

// The splitmix64 generator. Every random draw in the library goes through this
// so that a seed pins the exact output bytes on any platform.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // (0, 1], safe as a logarithm argument.
    double uniform_positive() noexcept { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

    // Standard normal via Box-Muller (cosine branch only; two draws per sample).
    double normal() noexcept {
        const double u1 = uniform_positive();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace qocr
