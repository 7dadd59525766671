#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace ezfsched::rng {

// SplitMix64 finalizer; used to derive independent substream seeds from a
// master seed. Substreams are keyed by name and by integer indices so that
// draws for one entity never depend on how many other entities exist.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Named substream root, e.g. substream(master, "fading").
constexpr std::uint64_t substream(std::uint64_t master, std::string_view name) {
  return mix(master, fnv1a(name));
}

inline std::uint64_t chain(std::uint64_t seed, std::initializer_list<std::uint64_t> idx) {
  for (auto i : idx) seed = mix(seed, i + 1);
  return seed;
}

inline std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace ezfsched::rng
