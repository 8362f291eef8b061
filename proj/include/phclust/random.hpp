#pragma once

// Seedable generator with a fixed, documented algorithm so that permutation
// tests and sampled point clouds are identical across runs and platforms.
// The standard <random> distributions are implementation-defined, so bounded
// integers and unit doubles are derived here directly from the raw bits.

#include <array>
#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace phclust {

/// SplitMix64 finalizer, used for seeding and for deriving sub-stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed of sub-stream `index` of `master`: splitmix64(splitmix64(master) ^ index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(splitmix64(master) ^ index);
}

/// xoshiro256** 1.0 (Blackman & Vigna), state filled by successive SplitMix64 outputs.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept {
        std::uint64_t x = seed;
        for (auto& s : state_) {
            s = splitmix64(x);
            x += 0x9e3779b97f4a7c15ull;
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = std::rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, bound) by Lemire's multiply-and-reject; bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(m);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * bound;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double unit() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::array<std::uint64_t, 4> state_{};
};

/// Fisher-Yates, from the last position down.
template <typename T>
void shuffle(std::span<T> values, Xoshiro256& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(values[i - 1], values[j]);
    }
}

} // namespace phclust
