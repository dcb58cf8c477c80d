#pragma once

#include <cstdint>
#include <random>

namespace geokrige {

// Stream derivation keeps every random consumer on its own engine, addressed
// by (seed, purpose, index). Replication k's stream is independent of how many
// replications run before or after it, which is what makes resumed and
// re-threaded runs reproduce byte-identical output.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt,
                              std::uint64_t index = 0) {
  return splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dULL) + salt * 0x9e3779b97f4a7c15ULL + index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t salt,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(mix_seed(seed, salt, index));
}

// Purpose salts. Values are arbitrary but frozen: changing them changes every
// simulated field and sample.
namespace rng_salt {
constexpr std::uint64_t field = 0x01;
constexpr std::uint64_t nugget = 0x02;
constexpr std::uint64_t test_points = 0x03;
constexpr std::uint64_t replication = 0x04;
constexpr std::uint64_t variable = 0x05;
constexpr std::uint64_t case_study = 0x06;
}  // namespace rng_salt

}  // namespace geokrige
