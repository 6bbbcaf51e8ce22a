#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dforge {

// Counter-based generator: the stream is a pure function of (seed, index), so
// samples can be drawn in any order or in parallel without changing a single
// byte of output. Normal variates use Box-Muller on two counter draws.
//
// The name below goes into run metadata; reproducibility is promised within
// this artifact, not across implementations.
inline constexpr const char* kGeneratorName = "splitmix64-boxmuller-v1";

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t bits(std::uint64_t index) const {
        // splitmix64 finalizer over seed + index * odd gamma
        std::uint64_t z = seed_ + (index + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on (0,1]; never 0, so it is safe under log().
    double uniform(std::uint64_t index) const {
        return ((bits(index) >> 11) + 1) * 0x1.0p-53;
    }

    // One standard normal per index (indices 2k, 2k+1 of the uniform stream).
    double normal(std::uint64_t index) const {
        const double u1 = uniform(2 * index);
        const double u2 = uniform(2 * index + 1);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    // Sequential convenience for Monte-Carlo loops.
    double next_uniform() { return uniform(cursor_++); }
    double next_normal() {
        const double u1 = uniform(cursor_++);
        const double u2 = uniform(cursor_++);
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t seed_;
    std::uint64_t cursor_ = 0;
};

}  // namespace dforge
