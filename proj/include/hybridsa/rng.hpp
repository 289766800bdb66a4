#pragma once

// Counter-based random streams: every (seed, purpose, k, j) gets its own
// generator, so a draw never depends on how many draws happened before it.

#include <cstdint>
#include <random>

namespace hybridsa {

enum class StreamTag : std::uint64_t {
  FlowNoise = 1,
  JumpNoise = 2,
  Policy = 3,
  Annealing = 4,
  Initial = 5,
  Graph = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ (b * 0xd6e8feb86659fd93ULL));
}

inline std::mt19937_64 make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  return std::mt19937_64(stream_key(seed, tag, a, b));
}

}  // namespace hybridsa
