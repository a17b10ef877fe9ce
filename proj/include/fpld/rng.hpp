#pragma once

// Counter-based random streams. Every draw is a pure function of
// (stream seed, purpose, node, round, probe, coordinate), so any
// coordinate can be regenerated independently on either side of the
// channel and the results do not depend on thread scheduling.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace fpld::rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Mixes an experiment label and a run seed into one stream seed.
inline constexpr std::uint64_t derive_seed(std::string_view experiment,
                                           std::uint64_t seed) {
  return splitmix64(fnv1a(experiment) ^ splitmix64(seed));
}

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

// Philox4x32-10 (Salmon et al., SC'11).
inline constexpr Counter philox4x32(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

enum class Purpose : std::uint32_t {
  kDither = 0x44495448u,
  kNoise = 0x4E4F4953u,
  kTruth = 0x54525554u,
  kTest = 0x54455354u,
};

/// Identifies one length-V vector of draws.
struct StreamKey {
  std::uint64_t seed = 0;
  Purpose purpose = Purpose::kTest;
  std::uint16_t node = 0;
  std::uint16_t round = 0;
  std::uint32_t probe = 0;
};

namespace detail {

inline constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline constexpr std::array<double, 2> block(const StreamKey& k,
                                             std::uint32_t block_index) {
  const std::uint64_t mixed =
      splitmix64(k.seed ^ (static_cast<std::uint64_t>(k.purpose) << 17));
  const Key key{static_cast<std::uint32_t>(mixed),
                static_cast<std::uint32_t>(mixed >> 32)};
  const Counter ctr{block_index, k.probe,
                    (static_cast<std::uint32_t>(k.node) << 16) | k.round,
                    static_cast<std::uint32_t>(k.purpose)};
  const Counter out = philox4x32(ctr, key);
  return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
}

}  // namespace detail

/// Uniform on [0, 1) for coordinate `index` of the keyed stream.
inline double uniform(const StreamKey& k, std::uint64_t index) {
  const auto b = detail::block(k, static_cast<std::uint32_t>(index >> 1));
  return b[index & 1u];
}

/// Standard normal for coordinate `index` (Box-Muller on the coordinate's block).
inline double normal(const StreamKey& k, std::uint64_t index) {
  const auto b = detail::block(k, static_cast<std::uint32_t>(index >> 1));
  const double radius = std::sqrt(-2.0 * std::log1p(-b[0]));  // 1 - u in (0, 1]
  const double angle = 2.0 * std::numbers::pi * b[1];
  return (index & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
}

}  // namespace fpld::rng
