#pragma once

// Self-contained deterministic random number generation.
//
// The standard library distributions (std::normal_distribution,
// std::uniform_int_distribution) are implementation-defined, so identical
// seeds can produce different streams under different standard libraries.
// Every randomised experiment in this project must be reproducible from a
// single integer seed, so we pin both the generator (xoshiro256++) and the
// distributions (53-bit uniform doubles, Box-Muller normals, rejection
// sampling for bounded integers).

#include "ekisel/types.hpp"

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace ekisel {

// splitmix64 step; used for seeding and for deriving child seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives a child seed from a master seed and a path of integers
// (e.g. {family_id, experiment_index, purpose}).  Each component is folded
// into a splitmix64 chain, so distinct paths give statistically independent
// streams and the mapping is stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  // Uniform integer in {0, 1, ..., n-1} via rejection sampling (unbiased,
  // platform-stable).  Requires n >= 1.
  std::uint64_t bounded(std::uint64_t n);

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached, so draws come in a fixed deterministic order.
  double normal();

  Vector gaussian_vector(int n);
  Matrix gaussian_matrix(int rows, int cols);  // filled column by column

  // k distinct indices drawn uniformly from {0, ..., n-1} (partial
  // Fisher-Yates), returned sorted ascending.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t s_[4];
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// Haar-distributed orthogonal matrix: QR of an iid Gaussian matrix with the
// sign convention diag(R) > 0.
Matrix haar_orthogonal(int n, Rng& rng);

}  // namespace ekisel
