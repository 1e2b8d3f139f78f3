#pragma once

#include <cstdint>
#include <initializer_list>

namespace spgi {

/// Counter-based random stream. A stream is identified by a key derived from
/// a user seed plus a path of integers (purpose tag, realization, cycle, ...),
/// so any draw can be reproduced in isolation and streams can be consumed in
/// any order without affecting each other.
class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    static std::uint64_t mix(std::uint64_t z);

    /// Derive a stream key from a seed and a path of indices.
    static std::uint64_t derive_key(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path);

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double next_unit();

    /// Uniform double in (0, 1].
    double next_unit_open_low();

    /// Standard normal deviate (Box-Muller).
    double next_gaussian();

    /// Poisson deviate with mean lambda >= 0.
    /// Sequential search below lambda = 30, transformed rejection (PTRS) above.
    std::uint64_t next_poisson(double lambda);

private:
    std::uint64_t state_;
};

/// Convenience: stream at seed/path.
Rng rng_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Purpose tags used to separate streams drawn from the same seed.
namespace rng_tag {
inline constexpr std::uint64_t diffuser = 0x1;
inline constexpr std::uint64_t scan = 0x2;
inline constexpr std::uint64_t jitter = 0x3;
inline constexpr std::uint64_t shot_noise = 0x4;
inline constexpr std::uint64_t systematic_noise = 0x5;
}  // namespace rng_tag

}  // namespace spgi
