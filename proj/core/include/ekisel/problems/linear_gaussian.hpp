#pragma once

// Randomised linear-Gaussian test family: dense operator with uniform
// entries, rotation-invariant prior with polynomially decaying spectrum,
// data simulated from a prior draw plus small observation noise.

#include "ekisel/random.hpp"
#include "ekisel/types.hpp"

#include <cstdint>

namespace ekisel {

struct LinearGaussianConfig {
  int m = 30;                // observations
  int n = 50;                // states
  double noise = 1e-4;       // observation noise standard deviation
  double decay_power = 2.0;  // prior eigenvalue (1 + k)^-decay_power
};

struct LinearGaussianProblem {
  Matrix a;       // m x n, entries iid U[0, 1]
  Matrix v;       // prior eigenvectors (Haar orthogonal)
  Vector lambda;  // prior eigenvalues (1 + k)^-p, k = 1..n
  Vector u_true;  // prior draw
  Vector y;       // A u_true + noise * xi
};

// Draw order (fixed for reproducibility): operator entries column by
// column, then the Gaussian matrix behind the Haar factor, then the prior
// draw, then the observation noise.
LinearGaussianProblem gen_linear_gaussian(std::uint64_t seed,
                                          const LinearGaussianConfig& config = {});

}  // namespace ekisel
