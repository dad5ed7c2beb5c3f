#pragma once

// Dense BFGS with Armijo backtracking.  The objective is split into a
// value-only callback (cheap, used inside the line search) and a
// value-and-gradient callback (used once per outer iteration), because for
// PDE-constrained objectives the gradient costs a full Jacobian while the
// value costs one forward solve.

#include "ekisel/types.hpp"

#include <functional>

namespace ekisel {

struct BfgsOptions {
  int max_iterations = 500;
  // Converged when |grad| <= grad_tol * (1 + |value|).
  double grad_tol = 1e-8;
  // Also converged when two consecutive accepted steps each decrease the
  // value by <= value_tol * (1 + |value|); this catches objectives whose
  // finite-difference gradient noise floor sits above grad_tol.
  double value_tol = 1e-13;
  double armijo_slope = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
};

struct BfgsResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  int iterations = 0;
  bool converged = false;
  // Set when the search stopped on the iteration cap or a failed line
  // search; the best iterate seen is still returned.
  bool stalled = false;
};

using ValueFn = std::function<double(const Vector&)>;
using ValueGradFn = std::function<double(const Vector&, Vector&)>;

BfgsResult minimize_bfgs(const ValueFn& value, const ValueGradFn& value_grad,
                         Vector x0, const BfgsOptions& opts = {});

}  // namespace ekisel
