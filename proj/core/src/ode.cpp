#include "ekisel/ode.hpp"

#include <algorithm>
#include <cmath>

namespace ekisel {

namespace {

// Dormand-Prince 5(4) tableau.  The last row of A equals the 5th-order
// weights (FSAL), so an accepted step reuses its final stage as k1.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// Difference between the 5th- and 4th-order weights.
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

double scaled_error(const Vector& err, const Vector& y, const Vector& y_new,
                    double rtol, double atol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale =
        atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
    const double ratio = err[i] / scale;
    sum += ratio * ratio;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

// Hairer/Norsett/Wanner starting step heuristic (order 5).
double initial_step(const std::function<Vector(const Vector&)>& f,
                    const Vector& y0, const Vector& f0, double span,
                    double rtol, double atol, OdeStats* stats) {
  const auto scaled_norm = [&](const Vector& v, const Vector& ref) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double scale = atol + rtol * std::abs(ref[i]);
      const double ratio = v[i] / scale;
      sum += ratio * ratio;
    }
    return std::sqrt(sum / static_cast<double>(v.size()));
  };
  const double d0 = scaled_norm(y0, y0);
  const double d1 = scaled_norm(f0, y0);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const Vector y1 = y0 + h0 * f0;
  Vector f1;
  try {
    f1 = f(y1);
  } catch (const NumericalDegeneracy&) {
    f1.resize(0);  // probe overshot the representable range
  }
  if (stats) ++stats->rhs_evals;
  if (f1.size() == 0 || !f1.allFinite()) return std::min(h0 * 1e-3, span);
  const double d2 = scaled_norm(f1 - f0, y0) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = (dmax <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                    : std::pow(0.01 / dmax, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span});
}

}  // namespace

Vector integrate_ode(const std::function<Vector(const Vector&)>& f, Vector y0,
                     double t0, double t1, const OdeOptions& opts,
                     OdeStats* stats) {
  if (!(t1 >= t0)) throw InvalidInput("integrate_ode requires t1 >= t0");
  if (!y0.allFinite()) throw InvalidInput("integrate_ode: non-finite state");
  if (t1 == t0) return y0;

  const double span = t1 - t0;
  const double rtol = opts.rel_tol;
  const double atol = opts.abs_tol;

  double t = t0;
  Vector y = std::move(y0);
  Vector k1 = f(y);
  if (stats) ++stats->rhs_evals;
  double h = initial_step(f, y, k1, span, rtol, atol, stats);

  Vector k2, k3, k4, k5, k6, k7, y_new, err;
  long steps = 0;
  bool previous_rejected = false;
  const double h_floor = 1e-14 * std::max(1.0, std::abs(t1));

  while (t < t1) {
    if (steps++ >= opts.max_steps)
      throw IntegrationFailure("integrate_ode: step budget exhausted", t);
    h = std::min(h, t1 - t);
    if (h < h_floor)
      throw IntegrationFailure("integrate_ode: step size underflow", t);

    // A right-hand side that leaves the representable range (e.g. a forward
    // operator overflowing at an overshot trial stage) rejects the step like
    // an oversized error estimate would, so the controller can retry smaller.
    bool stage_failed = false;
    try {
      k2 = f(y + h * (kA21 * k1));
      k3 = f(y + h * (kA31 * k1 + kA32 * k2));
      k4 = f(y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
      k5 = f(y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
      k6 = f(y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 +
                      kA65 * k5));
      y_new = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
      k7 = f(y_new);
    } catch (const NumericalDegeneracy&) {
      stage_failed = true;
    }
    if (stats) stats->rhs_evals += 6;
    if (stage_failed) {
      if (stats) ++stats->steps_rejected;
      h *= 0.1;
      previous_rejected = true;
      continue;
    }

    err = h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);
    const double err_norm = scaled_error(err, y, y_new, rtol, atol);

    if (err_norm <= 1.0 && y_new.allFinite()) {
      t += h;
      y.swap(y_new);
      k1.swap(k7);  // FSAL
      if (stats) ++stats->steps_accepted;
      double factor = (err_norm <= 1e-30) ? 5.0
                                          : 0.9 * std::pow(err_norm, -0.2);
      factor = std::clamp(factor, 0.2, previous_rejected ? 1.0 : 5.0);
      h *= factor;
      previous_rejected = false;
    } else {
      if (stats) ++stats->steps_rejected;
      const double factor = std::isfinite(err_norm) && err_norm > 1e-30
                                ? std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9)
                                : 0.1;
      h *= factor;
      previous_rejected = true;
    }
  }
  return y;
}

}  // namespace ekisel
