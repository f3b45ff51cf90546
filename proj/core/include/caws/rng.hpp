#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace caws {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a base seed and a path of stream labels.
/// Each label is folded in with splitmix64, so streams for distinct label
/// paths are independent and adding new paths never changes existing ones.
constexpr std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t label : path) h = splitmix64(h ^ splitmix64(label + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream labels.
inline constexpr std::uint64_t kInstanceStream = 0x1;
inline constexpr std::uint64_t kTraceStream = 0x2;
inline constexpr std::uint64_t kEpisodeStream = 0x3;
inline constexpr std::uint64_t kPolicyStream = 0x4;
inline constexpr std::uint64_t kRewardStream = 0x5;

/// Uniform integer in [0, n). n must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace caws
