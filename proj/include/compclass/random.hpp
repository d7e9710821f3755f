#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace compclass {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to turn (seed, stream id, ...) tuples into
/// well-separated generator seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic child seed from a base seed and a list of stream labels.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> labels) {
  std::uint64_t h = mix64(base);
  for (auto label : labels) h = mix64(h ^ mix64(label + 0x632be59bd9b4e019ULL));
  return h;
}

// Stream labels, so independent consumers of one experiment seed never collide.
namespace stream {
inline constexpr std::uint64_t kModel = 1;
inline constexpr std::uint64_t kPhi = 2;
inline constexpr std::uint64_t kMonteCarlo = 3;
}  // namespace stream

}  // namespace compclass
