#pragma once

#include <cmath>
#include <cstdint>

namespace sdemi::rng {

// Counter-based generation: every variate is a pure function of
// (seed, stream, replicate, slot, counter), so ensembles are reproducible
// under any parallel schedule and streams never overlap.

// Stream ids. Input sampling and Brownian increments use disjoint streams so
// X and W are independent by construction.
inline constexpr std::uint64_t kStreamNoise = 0x6e6f697365ULL;   // "noise"
inline constexpr std::uint64_t kStreamInput = 0x696e707574ULL;   // "input"
inline constexpr std::uint64_t kStreamProbe = 0x70726f6265ULL;   // "probe"

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t replicate = 0;
  std::uint64_t slot = 0;  // extra lane, e.g. one per r value when noise is not shared

  std::uint64_t base() const {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ replicate);
    h = splitmix64(h ^ slot);
    return h;
  }
};

inline std::uint64_t bits(const StreamKey& key, std::uint64_t counter) {
  return splitmix64(key.base() ^ (counter * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

// Uniform on (0, 1]; never returns 0 so it is safe under log().
inline double uniform01(const StreamKey& key, std::uint64_t counter) {
  return static_cast<double>((bits(key, counter) >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller; consumes counters 2c and 2c+1.
inline double normal(const StreamKey& key, std::uint64_t counter) {
  const double u1 = uniform01(key, 2 * counter);
  const double u2 = uniform01(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace sdemi::rng
