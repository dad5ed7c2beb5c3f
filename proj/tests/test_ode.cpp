#include "ekisel/ode.hpp"

#include "ekisel/random.hpp"

#include "doctest.h"

#include <cmath>
#include <functional>

using namespace ekisel;

namespace {

OdeOptions tight() {
  OdeOptions opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-13;
  return opts;
}

}  // namespace

TEST_CASE("scalar exponential decay matches exp(-t) at design accuracy") {
  const auto f = [](const Vector& y) -> Vector { return -y; };
  Vector y0(1);
  y0 << 1.0;
  const Vector y = integrate_ode(f, y0, 0.0, 2.0, tight());
  CHECK(std::abs(y[0] - std::exp(-2.0)) < 1e-8);
}

TEST_CASE("planar rotation conserves the radius and lands on the oracle") {
  // y' = M y with M = [[0, 1], [-1, 0]]: rotation, |y| constant.
  const auto f = [](const Vector& y) -> Vector {
    Vector out(2);
    out << y[1], -y[0];
    return out;
  };
  Vector y0(2);
  y0 << 1.0, 0.0;
  const double t = 3.0 * M_PI;  // one and a half turns
  const Vector y = integrate_ode(f, y0, 0.0, t, tight());
  CHECK(std::abs(y[0] - std::cos(t)) < 1e-8);
  CHECK(std::abs(y[1] + std::sin(t)) < 1e-8);
  CHECK(std::abs(y.norm() - 1.0) < 1e-8);
}

TEST_CASE("linear system with random matrix matches a series-evaluated exponential") {
  Rng rng(314);
  const int n = 5;
  const Matrix m = 0.5 * rng.gaussian_matrix(n, n);
  const Vector y0 = rng.gaussian_vector(n);
  const double t = 1.5;

  // exp(tM) by scaling and squaring of the Taylor series (independent of
  // the integrator path).
  Matrix base = (t / 64.0) * m;
  Matrix expm = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 20; ++k) {
    term = term * base / static_cast<double>(k);
    expm += term;
  }
  for (int square = 0; square < 6; ++square) expm = expm * expm;

  const auto f = [&](const Vector& y) -> Vector { return m * y; };
  const Vector y = integrate_ode(f, y0, 0.0, t, tight());
  CHECK((y - expm * y0).norm() / (expm * y0).norm() < 1e-8);
}

TEST_CASE("tightening the tolerance tightens the answer") {
  const auto f = [](const Vector& y) -> Vector {
    Vector out(2);
    out << y[1], -y[0];
    return out;
  };
  Vector y0(2);
  y0 << 1.0, 0.0;
  const Vector exact = [&] {
    Vector v(2);
    v << std::cos(10.0), -std::sin(10.0);
    return v;
  }();

  OdeOptions loose;
  loose.rel_tol = 1e-4;
  OdeOptions fine;
  fine.rel_tol = 1e-9;
  fine.abs_tol = 1e-13;
  const double err_loose =
      (integrate_ode(f, y0, 0.0, 10.0, loose) - exact).norm();
  const double err_fine = (integrate_ode(f, y0, 0.0, 10.0, fine) - exact).norm();
  CHECK(err_fine < err_loose);
  CHECK(err_fine < 1e-7);
}

TEST_CASE("zero-length horizon is an identity and stats count real work") {
  const auto f = [](const Vector& y) -> Vector { return -y; };
  Vector y0(1);
  y0 << 3.0;
  CHECK(integrate_ode(f, y0, 1.0, 1.0)[0] == 3.0);

  OdeStats stats;
  integrate_ode(f, y0, 0.0, 1.0, {}, &stats);
  CHECK(stats.steps_accepted > 0);
  // One k1, one starting-step probe, then six stages per attempted step.
  CHECK(stats.rhs_evals ==
        2 + 6 * (stats.steps_accepted + stats.steps_rejected));
}

TEST_CASE("step budget exhaustion reports the time reached") {
  const auto f = [](const Vector& y) -> Vector {
    Vector out(2);
    out << y[1], -y[0];
    return out;
  };
  Vector y0(2);
  y0 << 1.0, 0.0;
  OdeOptions opts;
  opts.max_steps = 5;
  bool threw = false;
  try {
    integrate_ode(f, y0, 0.0, 1e6, opts);
  } catch (const IntegrationFailure& failure) {
    threw = true;
    CHECK(failure.time_reached() >= 0.0);
    CHECK(failure.time_reached() < 1e6);
  }
  CHECK(threw);
}

TEST_CASE("invalid inputs are rejected up front") {
  const auto f = [](const Vector& y) -> Vector { return -y; };
  Vector y0(1);
  y0 << 1.0;
  CHECK_THROWS_AS(integrate_ode(f, y0, 1.0, 0.0), InvalidInput);
  Vector bad(1);
  bad << std::nan("");
  CHECK_THROWS_AS(integrate_ode(f, bad, 0.0, 1.0), InvalidInput);
}

TEST_CASE("a right-hand side that fails on early trial stages recovers") {
  // Calls 2..4 (the starting-step probe and the first trial stages) throw;
  // the controller must reject, shrink the step and still land on exp(-1).
  int calls = 0;
  const auto f = [&calls](const Vector& y) -> Vector {
    ++calls;
    if (calls >= 2 && calls <= 4)
      throw NumericalDegeneracy("transient overflow");
    return -y;
  };
  Vector y0(1);
  y0 << 1.0;
  OdeStats stats;
  const Vector y = integrate_ode(f, y0, 0.0, 1.0, {}, &stats);
  CHECK(std::abs(y[0] - std::exp(-1.0)) < 1e-5);
  CHECK(stats.steps_rejected >= 1);
}

TEST_CASE("a permanently failing right-hand side ends in IntegrationFailure") {
  int calls = 0;
  const auto f = [&calls](const Vector& y) -> Vector {
    ++calls;
    if (calls >= 2) throw NumericalDegeneracy("hard overflow");
    return -y;
  };
  Vector y0(1);
  y0 << 1.0;
  bool threw = false;
  try {
    integrate_ode(f, y0, 0.0, 1.0);
  } catch (const IntegrationFailure& failure) {
    threw = true;
    CHECK(failure.time_reached() == 0.0);
  }
  CHECK(threw);
}
