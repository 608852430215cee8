#pragma once

#include <cstdint>

namespace agesched {

// Counter-based uniform stream. Every draw is a pure function of
// (seed, slot, user ordinal, draw kind), so trajectories are reproducible for
// a given seed no matter what the policy decides, and different policies see
// identical randomness (common random numbers for paired comparisons).

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

} // namespace detail

enum class DrawKind : std::uint32_t { Arrival = 0, Completion = 1 };

/// Uniform value in [0, 1) for one (seed, slot, user, kind) cell.
inline double slot_uniform(std::uint64_t seed, std::int64_t slot,
                           std::uint32_t user_ordinal, DrawKind kind) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(slot + 1);
    x = detail::mix64(x);
    x += ((static_cast<std::uint64_t>(user_ordinal) << 1) |
          static_cast<std::uint64_t>(kind)) *
         0xd1b54a32d192ed03ULL;
    x = detail::mix64(x);
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

} // namespace agesched
