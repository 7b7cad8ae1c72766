#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace qmem {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
}

}  // namespace detail

/// Per-trajectory Gaussian noise stream. The state is derived from
/// (master_seed, trajectory_index) by a splittable counter construction,
/// so streams are order-independent and safe to create concurrently:
/// equal pairs reproduce the same sequence bit-for-bit, distinct indices
/// give statistically independent sequences.
///
/// Generator: xoshiro256++ seeded via splitmix64; normals by Box-Muller
/// with a cached spare, so draw counts are deterministic.
class NoiseStream {
public:
    NoiseStream(std::uint64_t master_seed, std::uint64_t trajectory_index)
        : trajectory_index_(trajectory_index) {
        std::uint64_t ctr = master_seed ^ (0x9e3779b97f4a7c15ULL * (trajectory_index + 1));
        derived_seed_ = detail::splitmix64(ctr);
        std::uint64_t x = derived_seed_;
        for (auto& word : state_) word = detail::splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] keeps the log finite
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t derived_seed() const { return derived_seed_; }
    std::uint64_t trajectory_index() const { return trajectory_index_; }

private:
    std::array<std::uint64_t, 4> state_{};
    std::uint64_t derived_seed_ = 0;
    std::uint64_t trajectory_index_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace qmem
