#include "ekisel/optim/bfgs.hpp"

#include <cmath>

namespace ekisel {

BfgsResult minimize_bfgs(const ValueFn& value, const ValueGradFn& value_grad,
                         Vector x0, const BfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  BfgsResult result;
  result.x = std::move(x0);
  Vector grad(n);
  result.value = value_grad(result.x, grad);
  result.gradient = grad;

  Matrix h_inv = Matrix::Identity(n, n);  // inverse Hessian approximation
  bool h_is_identity = true;
  int stagnant_steps = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (grad.norm() <= opts.grad_tol * (1.0 + std::abs(result.value))) {
      result.converged = true;
      break;
    }

    Vector direction = -(h_inv * grad);
    double slope = direction.dot(grad);
    if (!(slope < 0.0)) {
      // Curvature information went bad; restart from steepest descent.
      h_inv.setIdentity();
      h_is_identity = true;
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    // Armijo backtracking.
    double step = 1.0;
    double trial_value = 0.0;
    Vector trial;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      trial = result.x + step * direction;
      trial_value = value(trial);
      if (std::isfinite(trial_value) &&
          trial_value <= result.value + opts.armijo_slope * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.backtrack_factor;
    }
    if (!accepted) {
      result.stalled = true;
      break;
    }

    Vector new_grad(n);
    const double new_value = value_grad(trial, new_grad);
    if (result.value - new_value <=
        opts.value_tol * (1.0 + std::abs(new_value))) {
      ++stagnant_steps;
    } else {
      stagnant_steps = 0;
    }
    const Vector s = trial - result.x;
    const Vector delta_grad = new_grad - grad;
    const double sy = s.dot(delta_grad);

    if (sy > 1e-12 * s.norm() * delta_grad.norm()) {
      if (h_is_identity) {
        // Scale the initial inverse Hessian before the first update.
        h_inv *= sy / delta_grad.squaredNorm();
        h_is_identity = false;
      }
      const double rho = 1.0 / sy;
      const Vector hy = h_inv * delta_grad;
      // BFGS inverse update (Sherman-Morrison form).
      h_inv += (sy + delta_grad.dot(hy)) * rho * rho * (s * s.transpose()) -
               rho * (hy * s.transpose() + s * hy.transpose());
    }

    result.x = std::move(trial);
    result.value = new_value;
    grad = std::move(new_grad);
    result.gradient = grad;
    result.iterations = iter + 1;
    if (stagnant_steps >= 2) {
      result.converged = true;
      break;
    }
  }

  if (!result.converged &&
      grad.norm() <= opts.grad_tol * (1.0 + std::abs(result.value)))
    result.converged = true;
  return result;
}

}  // namespace ekisel
