#include "ekisel/eki.hpp"

#include "ekisel/ensemble.hpp"
#include "ekisel/forward_model.hpp"
#include "ekisel/householder.hpp"
#include "ekisel/linear_dynamics.hpp"
#include "ekisel/problems/sigmoid.hpp"
#include "ekisel/random.hpp"

#include "doctest.h"

#include <Eigen/QR>

#include <cmath>

using namespace ekisel;

TEST_CASE("ensemble moments match the 1/J convention on a hand example") {
  Matrix particles(2, 2);
  particles << 1.0, 3.0, 2.0, 4.0;
  const Ensemble e(particles);
  CHECK(e.dim() == 2);
  CHECK(e.size() == 2);
  CHECK(e.mean()[0] == doctest::Approx(2.0));
  CHECK(e.mean()[1] == doctest::Approx(3.0));

  Matrix dev_expected(2, 2);
  dev_expected << -1.0, 1.0, -1.0, 1.0;
  CHECK((e.deviations() - dev_expected).norm() == doctest::Approx(0.0));

  // C = (1/2) E E^T = [[1, 1], [1, 1]].
  Matrix cov_expected(2, 2);
  cov_expected << 1.0, 1.0, 1.0, 1.0;
  CHECK((e.covariance() - cov_expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("ensembles require at least two finite particles") {
  CHECK_THROWS_AS(Ensemble(Matrix::Zero(3, 1)), InvalidInput);
  Matrix bad = Matrix::Zero(2, 3);
  bad(1, 2) = std::nan("");
  CHECK_THROWS_AS(Ensemble{bad}, InvalidInput);
}

TEST_CASE("eki_rhs equals the preconditioned gradient flow for linear maps") {
  Rng rng(42);
  const int m = 6, n = 9, j = 4;
  const Matrix a = rng.gaussian_matrix(m, n);
  const Matrix u = rng.gaussian_matrix(n, j);
  const Vector y = rng.gaussian_vector(m);
  const LinearModel model(a);

  const Matrix rhs = eki_rhs(u, model, y);

  const Ensemble e(u);
  const Matrix residual = a * u - y.replicate(1, j);
  const Matrix expected = -e.covariance() * a.transpose() * residual;
  CHECK((rhs - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("integrated linear flow matches the closed-form particles") {
  Rng rng(7);
  const int m = 5, n = 8, j = 4;
  const Matrix a = rng.gaussian_matrix(m, n);
  const Ensemble e0(rng.gaussian_matrix(n, j));
  const Vector y = rng.gaussian_vector(m);
  const auto fact = factorize(a, e0);

  OdeOptions opts;
  opts.rel_tol = 1e-10;
  opts.abs_tol = 1e-13;
  for (double t : {0.3, 1.0, 4.0}) {
    const Matrix closed = particles_at(e0, a, y, fact, t);
    const Ensemble flowed = eki_integrate(e0, LinearModel(a), y, t, opts);
    CHECK((flowed.particles() - closed).norm() / closed.norm() < 1e-6);
  }
}

TEST_CASE("particles never leave the affine span of the initial ensemble") {
  Rng rng(123);
  const int m = 7, n = 10, j = 4;
  const Matrix w = rng.gaussian_matrix(m, n);
  const SigmoidModel model(w.cwiseAbs());
  const Ensemble e0(rng.gaussian_matrix(n, j));
  const Vector y = Vector::Constant(m, 0.4);

  const Ensemble moved = eki_integrate(e0, model, y, 5.0);

  // Basis of span(E_0) via a rank-revealing QR; displacements of every
  // particle from the initial mean must have no orthogonal component.
  Eigen::ColPivHouseholderQR<Matrix> qr(e0.deviations());
  const Matrix q = qr.householderQ() * Matrix::Identity(n, qr.rank());
  const Vector mean0 = e0.mean();
  for (int i = 0; i < j; ++i) {
    const Vector d = moved.particles().col(i) - mean0;
    const Vector orth = d - q * (q.transpose() * d);
    CHECK(orth.norm() < 1e-10 * (1.0 + d.norm()));
  }
}

TEST_CASE("augmented stacking reproduces the weighted objective exactly") {
  Rng rng(2718);
  const int m = 6, n = 9;
  const Matrix w = rng.gaussian_matrix(m, n);
  const SigmoidModel model(w);
  const Matrix v = haar_orthogonal(n, rng);
  Vector lambda(n);
  for (int k = 0; k < n; ++k) lambda[k] = std::pow(1.0 + k, -1.5);
  const double beta = 0.3;
  const Vector y = rng.gaussian_vector(m);
  const Vector mu = rng.gaussian_vector(n);

  const AugmentedProblem problem(model, {v, lambda}, beta, y, mu);
  CHECK((problem.lambda_eff() - lambda / beta).norm() == doctest::Approx(0.0));

  const Matrix r_inv =
      v * lambda.cwiseInverse().asDiagonal() * v.transpose();
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector u = rng.gaussian_vector(n);

    const Vector aug = problem.augmented_model().apply(u) -
                       problem.augmented_data();
    const double via_stack = 0.5 * aug.squaredNorm();

    const Vector du = u - mu;
    const double direct = 0.5 * (model.apply(u) - y).squaredNorm() +
                          0.5 * beta * du.dot(r_inv * du);

    CHECK(problem.objective(u) == doctest::Approx(direct).epsilon(1e-12));
    worst = std::max(worst,
                     std::abs(via_stack - direct) / (1.0 + std::abs(direct)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("augmented jacobian stacks the model jacobian over the prior rows") {
  Rng rng(555);
  const int m = 4, n = 6;
  const Matrix w = rng.gaussian_matrix(m, n);
  const SigmoidModel model(w);
  const Matrix v = haar_orthogonal(n, rng);
  const Vector lambda = Vector::Constant(n, 0.5);
  const AugmentedProblem problem(model, {v, lambda}, 2.0, rng.gaussian_vector(m),
                                 Vector::Zero(n));

  const Vector u = rng.gaussian_vector(n);
  const Matrix jac = problem.augmented_model().jacobian(u);
  REQUIRE(jac.rows() == m + n);
  CHECK((jac.topRows(m) - model.jacobian(u)).cwiseAbs().maxCoeff() < 1e-14);
  const Matrix prior_rows =
      problem.lambda_eff().cwiseInverse().cwiseSqrt().asDiagonal() *
      v.transpose();
  CHECK((jac.bottomRows(n) - prior_rows).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("augmented problems validate prior and regularisation inputs") {
  const LinearModel model(Matrix::Identity(3, 3));
  const Vector y = Vector::Zero(3);
  const Vector mu = Vector::Zero(3);
  const Vector lambda = Vector::Constant(3, 1.0);

  Matrix skew = Matrix::Identity(3, 3);
  skew(0, 1) = 0.5;  // not orthonormal
  CHECK_THROWS_AS(AugmentedProblem(model, {skew, lambda}, 1.0, y, mu),
                  InvalidInput);

  Vector bad_lambda = lambda;
  bad_lambda[1] = 0.0;
  CHECK_THROWS_AS(
      AugmentedProblem(model, {Matrix::Identity(3, 3), bad_lambda}, 1.0, y, mu),
      InvalidInput);

  CHECK_THROWS_AS(
      AugmentedProblem(model, {Matrix::Identity(3, 3), lambda}, 0.0, y, mu),
      InvalidInput);
}

TEST_CASE("reflection_mapping sends `from` to `to` with an orthogonal matrix") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.bounded(6));
    const Vector from = rng.gaussian_vector(n).normalized();
    const Vector to = rng.gaussian_vector(n).normalized();
    const Matrix q = reflection_mapping(from, to);
    CHECK((q * from - to).norm() < 1e-12);
    CHECK((q.transpose() * q - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <
          1e-12);
    // A reflection is symmetric.
    CHECK((q - q.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("reflection_mapping handles aligned and antipodal directions") {
  Vector e1 = Vector::Unit(4, 0);
  const Matrix id = reflection_mapping(e1, e1);
  CHECK((id - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);

  const Vector minus = -e1;
  const Matrix point = reflection_mapping(e1, minus);
  CHECK((point * e1 - minus).norm() < 1e-12);
  CHECK((point.transpose() * point - Matrix::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  CHECK_THROWS_AS(reflection_mapping(2.0 * e1, e1), InvalidInput);
}
