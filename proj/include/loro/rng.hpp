#pragma once

#include <cstdint>
#include <random>

namespace loro {

// splitmix64; used to derive independent sub-seeds from one run seed so
// that env / agent / buffer / action streams never alias.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class SeedStream : std::uint64_t {
  Env = 1,
  Agent = 2,
  Buffer = 3,
  Actions = 4,
  Collector = 5,
  Pretrain = 6,
  Scout = 7,
};

inline std::mt19937_64 make_rng(std::uint64_t seed, SeedStream stream) {
  return std::mt19937_64(split_seed(seed, static_cast<std::uint64_t>(stream)));
}

}  // namespace loro
