#pragma once

#include "ekisel/types.hpp"

#include <functional>

namespace ekisel {

struct OdeOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  long max_steps = 1'000'000;
};

struct OdeStats {
  long steps_accepted = 0;
  long steps_rejected = 0;
  long rhs_evals = 0;
};

// Integrates the autonomous system y' = f(y) from t0 to t1 with the
// embedded Dormand-Prince 5(4) pair and PI-free standard step control
// (accept if the RMS of the componentwise scaled error is <= 1, step factor
// 0.9 * err^(-1/5) clamped to [0.2, 5]).  Throws IntegrationFailure carrying
// the time reached if the step size underflows or the step budget runs out.
Vector integrate_ode(const std::function<Vector(const Vector&)>& f, Vector y0,
                     double t0, double t1, const OdeOptions& opts = {},
                     OdeStats* stats = nullptr);

}  // namespace ekisel
