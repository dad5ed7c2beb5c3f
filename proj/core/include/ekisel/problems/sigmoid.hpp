#pragma once

// Componentwise saturating nonlinear operator
//
//   G_j(u) = 1 / (1 + exp((W u)_j)),
//
// a strictly decreasing logistic response of the linear feature (W u)_j with
// values in (0, 1).  The Jacobian is dG/du = -diag(g (1 - g)) W with
// g = G(u); both directions of the exponential are evaluated in the
// overflow-safe branch.

#include "ekisel/forward_model.hpp"
#include "ekisel/random.hpp"
#include "ekisel/types.hpp"

namespace ekisel {

class SigmoidModel final : public ForwardModel {
 public:
  explicit SigmoidModel(Matrix w);

  int input_dim() const override { return static_cast<int>(w_.cols()); }
  int output_dim() const override { return static_cast<int>(w_.rows()); }

  Vector apply(const Vector& u) const override;
  Matrix jacobian(const Vector& u) const override;  // analytic

  const Matrix& weights() const { return w_; }

 private:
  Matrix w_;
};

// Weights iid U[0, 1] (filled column by column).
Matrix random_sigmoid_weights(int m, int n, Rng& rng);

}  // namespace ekisel
