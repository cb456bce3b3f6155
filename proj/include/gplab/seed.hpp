#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gplab {

// 64-bit FNV-1a, used for tags and config hashes.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: a pure function of (master, tag, index), so
/// replicate r gets the same stream no matter which worker runs it.
constexpr std::uint64_t child_seed(std::uint64_t master, std::string_view tag,
                                   std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a(tag)) ^ splitmix64(index));
}

inline constexpr const char* kSeedDerivation =
    "splitmix64(splitmix64(master ^ fnv1a(tag)) ^ splitmix64(index))";

using Rng = std::mt19937_64;

}  // namespace gplab
