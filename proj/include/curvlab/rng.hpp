// Deterministic RNG: xoshiro256** seeded through splitmix64, normals via
// Box-Muller. Fully specified here so streams replay bit-exactly on any
// platform; <random> distributions are implementation-defined and never used.

#pragma once

#include <cstdint>
#include <vector>

namespace curvlab {

std::uint64_t splitmix64(std::uint64_t& state);

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();

  // Standard normal, Box-Muller; the second value of each pair is cached.
  double normal();

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);

  std::vector<double> normal_vector(std::size_t n);

  // Independent child stream; derivation depends only on (seed, tag).
  SeededRng fork(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace curvlab
