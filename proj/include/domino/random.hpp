#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace domino {

// Named RNG substreams. Every random decision in the project draws from an
// engine seeded by (run seed, stream, index) so that components can be
// reproduced independently of each other.
enum class Stream : std::uint64_t {
  noise = 1,
  masks = 2,
  validation_parity = 3,
  validation_masks = 4,
  random_fill = 5,
  init = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream,
                                    std::uint64_t index = 0) noexcept {
  return splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))) + index);
}

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream,
                                   std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(seed, stream, index));
}

}  // namespace domino
