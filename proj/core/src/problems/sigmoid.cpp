#include "ekisel/problems/sigmoid.hpp"

#include <cmath>

namespace ekisel {

namespace {

// 1 / (1 + e^t) without overflow for large |t|.
double falling_logistic(double t) {
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

}  // namespace

SigmoidModel::SigmoidModel(Matrix w) : w_(std::move(w)) {
  if (w_.rows() < 1 || w_.cols() < 1)
    throw InvalidInput("SigmoidModel requires a non-empty weight matrix");
  if (!w_.allFinite())
    throw InvalidInput("SigmoidModel weights must be finite");
}

Vector SigmoidModel::apply(const Vector& u) const {
  if (u.size() != w_.cols())
    throw InvalidInput("SigmoidModel::apply: input dimension mismatch");
  Vector features = w_ * u;
  for (Eigen::Index i = 0; i < features.size(); ++i)
    features[i] = falling_logistic(features[i]);
  return features;
}

Matrix SigmoidModel::jacobian(const Vector& u) const {
  const Vector g = apply(u);
  // dG_j/du = -g_j (1 - g_j) W_j.
  return (-g.array() * (1.0 - g.array())).matrix().asDiagonal() * w_;
}

Matrix random_sigmoid_weights(int m, int n, Rng& rng) {
  Matrix w(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) w(i, j) = rng.uniform01();
  return w;
}

}  // namespace ekisel
