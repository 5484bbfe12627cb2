#pragma once

#include <cstdint>
#include <random>

namespace uplift {

using Rng = std::mt19937_64;

// splitmix64 finalizer; derives independent child seeds from a master seed
// so results do not depend on build/evaluation order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Index in [0, bound); bound > 0.
inline std::uint64_t draw_below(Rng& rng, std::uint64_t bound) { return rng() % bound; }

}  // namespace uplift
