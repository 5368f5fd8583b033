#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dtrbench {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x632BE59BD9B4E019ULL));
}

/// 64-bit FNV-1a. Stable across platforms, used for protocol hashes and checksums.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Uniform double in [lo, hi) built from raw 64-bit draws so that results do not
/// depend on the standard library's distribution implementations.
double uniform(Rng& rng, double lo, double hi);

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal via Box-Muller on uniform().
double standard_normal(Rng& rng);

}  // namespace dtrbench
