#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

namespace semibandit {

/// Seeded generator shared by environments and policies. Copying an Rng
/// copies its full state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }

  boost::random::mt19937_64& engine() { return engine_; }

 private:
  boost::random::mt19937_64 engine_;  // same sequence as std::mt19937_64, faster here
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  boost::random::normal_distribution<double> normal_{0.0, 1.0};  // ziggurat
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a parent seed and a path of
/// indices, e.g. derive_seed(master, {env_index, rep}).
inline std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(parent);
  for (auto p : path) s = mix64(s ^ mix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

}  // namespace semibandit
