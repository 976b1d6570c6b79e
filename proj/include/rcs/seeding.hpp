#pragma once

// Counter-based randomness: every random draw is a pure function of a seed
// and a position, so results do not depend on evaluation order.

#include <cstdint>

namespace rcs::seeding {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Derives an independent stream key from a parent key and a position.
constexpr std::uint64_t derive(std::uint64_t parent, std::uint64_t index) {
  return splitmix64(splitmix64(parent ^ 0xD1B54A32D192ED03ull) + index);
}

/// Uniform in [0, 1) with 53 random bits.
constexpr double unit(std::uint64_t key) {
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

}  // namespace rcs::seeding
