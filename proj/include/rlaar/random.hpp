#pragma once

// Seed derivation and the few distributions the project needs.
//
// std::mt19937_64 output is fixed by the standard, but the std::*_distribution
// adaptors are implementation-defined, so draws are mapped to ranges here to
// keep golden values portable across standard libraries.

#include <cstdint>
#include <initializer_list>
#include <random>

#include "rlaar/errors.hpp"

namespace rlaar {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based split: the child seed depends only on the parent seed and
/// the coordinates, never on how many draws happened before.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t s = mix64(parent);
  for (std::uint64_t c : coords) s = mix64(s ^ mix64(c + 0x632be59bd9b4e019ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer on the closed interval [lo, hi], by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ArgumentError("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
    const std::uint64_t reject_below = (0 - span) % span;  // 2^64 mod span
    std::uint64_t x = next();
    while (x < reject_below) x = next();
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % span);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rlaar
