#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bwretrieve {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a stream seed from a master seed and a path of counters, e.g.
/// (master, trial) or (trial_seed, n, stream tag). Streams for different
/// paths are independent of one another and of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (auto c : path) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(mix64(seed)); }

/// Stream tags used under a trial seed.
enum class Stream : std::uint64_t { Ensemble = 1, Init = 2, Verify = 3 };

}  // namespace bwretrieve
