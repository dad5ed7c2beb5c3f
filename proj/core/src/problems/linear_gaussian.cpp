#include "ekisel/problems/linear_gaussian.hpp"

#include <cmath>

namespace ekisel {

LinearGaussianProblem gen_linear_gaussian(std::uint64_t seed,
                                          const LinearGaussianConfig& config) {
  if (config.m < 1 || config.n < 1)
    throw InvalidInput("gen_linear_gaussian: dimensions must be positive");
  Rng rng(seed);

  LinearGaussianProblem prob;
  prob.a.resize(config.m, config.n);
  for (int j = 0; j < config.n; ++j)
    for (int i = 0; i < config.m; ++i) prob.a(i, j) = rng.uniform01();

  prob.v = haar_orthogonal(config.n, rng);
  prob.lambda.resize(config.n);
  for (int k = 0; k < config.n; ++k)
    prob.lambda[k] = std::pow(2.0 + k, -config.decay_power);  // (1 + k')^-p, k' = 1..n

  prob.u_true = prob.v * prob.lambda.cwiseSqrt().cwiseProduct(
                             rng.gaussian_vector(config.n));
  prob.y = prob.a * prob.u_true + config.noise * rng.gaussian_vector(config.m);
  return prob;
}

}  // namespace ekisel
