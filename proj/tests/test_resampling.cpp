#include "ekisel/resampling.hpp"

#include "ekisel/eki.hpp"
#include "ekisel/linear_dynamics.hpp"
#include "ekisel/problems/sigmoid.hpp"
#include "ekisel/random.hpp"

#include "doctest.h"

#include <Eigen/SVD>

#include <cmath>
#include <vector>

using namespace ekisel;

namespace {

// G(u) = u^2 componentwise, with analytic Jacobian 2 diag(u).
class SquareModel final : public ForwardModel {
 public:
  explicit SquareModel(int n) : n_(n) {}
  int input_dim() const override { return n_; }
  int output_dim() const override { return n_; }
  Vector apply(const Vector& u) const override { return u.cwiseProduct(u); }
  Matrix jacobian(const Vector& u) const override {
    return Matrix(2.0 * u.asDiagonal());
  }

 private:
  int n_;
};

PriorSpectrum decayed_prior(int n, Rng& rng) {
  Vector lambda(n);
  for (int k = 0; k < n; ++k) lambda[k] = std::pow(1.0 + k, -2.0);
  return {haar_orthogonal(n, rng), lambda};
}

}  // namespace

TEST_CASE("schedules demand strictly increasing knots from zero") {
  const ResampleSchedule plain = ResampleSchedule::single_run(5.0);
  CHECK(plain.segment_count() == 1);
  CHECK(plain.resample_count() == 0);
  CHECK(plain.horizon() == 5.0);

  const ResampleSchedule dense =
      ResampleSchedule::with_interior(2.0, {1.5, 0.5});
  CHECK(dense.knots() == std::vector<double>{0.0, 0.5, 1.5, 2.0});
  CHECK(dense.segment_count() == 3);
  CHECK(dense.resample_count() == 2);

  CHECK_THROWS_AS(ResampleSchedule({0.0}), InvalidInput);
  CHECK_THROWS_AS(ResampleSchedule({0.5, 1.0}), InvalidInput);
  CHECK_THROWS_AS(ResampleSchedule({0.0, 1.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(ResampleSchedule::with_interior(1.0, {1.5}), InvalidInput);
}

TEST_CASE("linearize is exact for linear maps and explicit for the square map") {
  Rng rng(501);
  const Matrix a = rng.gaussian_matrix(4, 6);
  const Vector y = rng.gaussian_vector(4);
  const LinearModel linear(a);
  const LinearizationPoint at_zero = linearize(linear, Vector::Zero(6), y);
  CHECK((at_zero.a - a).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((at_zero.y_tilde - y).norm() < 1e-14);
  CHECK(at_zero.mu.norm() == 0.0);

  // Scalar G(u) = u^2 at u = 3: slope 6, shifted data y - 9, shift -3.
  const SquareModel square(1);
  Vector u_bar(1), data(1);
  u_bar << 3.0;
  data << 11.0;
  const LinearizationPoint lin = linearize(square, u_bar, data);
  CHECK(lin.a(0, 0) == doctest::Approx(6.0));
  CHECK(lin.y_tilde[0] == doctest::Approx(11.0 - 9.0));
  CHECK(lin.mu[0] == doctest::Approx(-3.0));
}

TEST_CASE("resampled ensembles sit at the restricted minimiser with flat spread") {
  Rng rng(502);
  const int m = 8, n = 10, j = 4;
  const Matrix a = rng.gaussian_matrix(m, n);
  const Vector y = rng.gaussian_vector(m);
  const PriorSpectrum prior = decayed_prior(n, rng);
  const double beta = 0.05;
  const LinearProblemSpec prob(a, y, Vector::Zero(n), prior.v,
                               prior.lambda / beta);

  ResampleOptions opts;
  opts.ensemble_size = j;
  const ResampleStep step = resample_at_mean(Vector::Zero(n), prob, opts);

  REQUIRE(step.indices.size() == static_cast<std::size_t>(j));
  CHECK_FALSE(step.used_standard_fallback);
  CHECK(step.ensemble.size() == j);
  CHECK(step.ensemble.dim() == n);

  // Deviations have the maximal rank J - 1 for an invertible mixing.
  Eigen::JacobiSVD<Matrix> svd(step.ensemble.deviations());
  int rank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()[k] > 1e-10 * svd.singularValues()[0]) ++rank;
  CHECK(rank == j - 1);

  const LongRunTerms terms = long_run_terms(step.indices, prob);
  CHECK(is_optimal_mixing(SubspaceChoice(step.indices, step.mixing), prob));
  CHECK(step.mixing.squaredNorm() ==
        doctest::Approx(static_cast<double>(j * j) *
                        terms.target.squaredNorm())
            .epsilon(1e-8));

  // Ensemble mean = u_bar + V_J zt (the subspace-restricted minimiser).
  Matrix v_sub(n, j);
  for (int k = 0; k < j; ++k) v_sub.col(k) = prob.v.col(step.indices[k]);
  CHECK((step.ensemble.mean() - v_sub * terms.target).norm() <
        1e-10 * (1.0 + terms.target.norm()));

  // Greedy indices match the selector run directly.
  CHECK(step.indices == greedy_select(prob, j).indices);

  ResampleOptions dominant = opts;
  dominant.selector = Selector::Dominant;
  CHECK(resample_at_mean(Vector::Zero(n), prob, dominant).indices ==
        dominant_select(prob, j));
}

TEST_CASE("degenerate targets fall back to the diagonal mixing") {
  Rng rng(503);
  const int m = 5, n = 6, j = 3;
  const Matrix a = rng.gaussian_matrix(m, n);
  const PriorSpectrum prior{Matrix::Identity(n, n), Vector::Constant(n, 1.0)};
  // Zero data and zero mean make the restricted minimiser vanish.
  const LinearProblemSpec prob(a, Vector::Zero(m), Vector::Zero(n), prior.v,
                               prior.lambda);
  ResampleOptions opts;
  opts.ensemble_size = j;
  const ResampleStep step = resample_at_mean(Vector::Zero(n), prob, opts);
  CHECK(step.used_standard_fallback);
  for (int k = 0; k < j; ++k)
    CHECK(step.mixing(k, k) ==
          doctest::Approx(std::sqrt(prob.lambda[step.indices[k]])));
}

TEST_CASE("resample from an ensemble equals resample at its mean") {
  Rng rng(504);
  const int m = 6, n = 8, j = 3;
  const Matrix w = rng.gaussian_matrix(m, n);
  const SigmoidModel model(w);
  const Vector y = Vector::Constant(m, 0.35);
  const PriorSpectrum prior = decayed_prior(n, rng);
  const double beta = 0.01;

  const Ensemble state(rng.gaussian_matrix(n, j));
  ResampleOptions opts;
  opts.ensemble_size = j;
  const ResampleStep via_state = resample(state, model, y, prior, beta, opts);

  const Vector u_bar = state.mean();
  const LinearizationPoint lin = linearize(model, u_bar, y);
  const LinearProblemSpec prob(lin.a, lin.y_tilde, lin.mu, prior.v,
                               prior.lambda / beta);
  const ResampleStep via_mean = resample_at_mean(u_bar, prob, opts);

  CHECK(via_state.indices == via_mean.indices);
  CHECK((via_state.ensemble.particles() - via_mean.ensemble.particles())
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("a single linear segment reproduces the augmented closed form") {
  Rng rng(505);
  const int m = 7, n = 9, j = 4;
  const Matrix a = rng.gaussian_matrix(m, n);
  const Vector y = rng.gaussian_vector(m);
  const PriorSpectrum prior = decayed_prior(n, rng);
  const double beta = 0.1;
  const LinearModel model(a);

  AdaptSelectOptions opts;
  opts.ensemble_size = j;
  opts.ode.rel_tol = 1e-10;
  opts.ode.abs_tol = 1e-13;
  const double horizon = 3.0;
  const AdaptSelectResult run = run_adapt_select(
      model, y, prior, beta, ResampleSchedule::single_run(horizon), opts);

  REQUIRE_FALSE(run.failed);
  CHECK(run.jacobian_evals == 1);
  REQUIRE(run.knot_states.size() == 1);
  REQUIRE(run.segments.size() == 1);
  CHECK(run.segments[0].objective_at_end <=
        run.segments[0].objective_after_resample + 1e-9);

  // Rebuild the same initial ensemble and flow it in closed form through
  // the augmented operator.
  const LinearProblemSpec prob(a, y, Vector::Zero(n), prior.v,
                               prior.lambda / beta);
  ResampleOptions step_opts;
  step_opts.ensemble_size = j;
  const ResampleStep step = resample_at_mean(Vector::Zero(n), prob, step_opts);

  Matrix a_aug(m + n, n);
  a_aug.topRows(m) = a;
  const Vector lambda_eff = prior.lambda / beta;
  a_aug.bottomRows(n) =
      lambda_eff.cwiseInverse().cwiseSqrt().asDiagonal() * prior.v.transpose();
  Vector y_aug = Vector::Zero(m + n);
  y_aug.head(m) = y;

  const auto fact = factorize(a_aug, step.ensemble);
  const Matrix closed =
      particles_at(step.ensemble, a_aug, y_aug, fact, horizon);
  CHECK((run.final_state().particles() - closed).norm() / closed.norm() <
        1e-6);
}

TEST_CASE("a long single linear segment attains the selected lower bound") {
  Rng rng(506);
  const int m = 6, n = 8, j = 3;
  const Matrix a = rng.gaussian_matrix(m, n);
  const Vector y = rng.gaussian_vector(m);
  const PriorSpectrum prior = decayed_prior(n, rng);
  const double beta = 0.2;

  AdaptSelectOptions opts;
  opts.ensemble_size = j;
  opts.ode.rel_tol = 1e-10;
  opts.ode.abs_tol = 1e-13;
  const AdaptSelectResult run =
      run_adapt_select(LinearModel(a), y, prior, beta,
                       ResampleSchedule::single_run(1e8), opts);
  REQUIRE_FALSE(run.failed);

  const LinearProblemSpec prob(a, y, Vector::Zero(n), prior.v,
                               prior.lambda / beta);
  const double floor = lower_bound(greedy_select(prob, j).indices, prob);
  // The segment log reports Phi = half the long-run value.
  const double attained = 2.0 * run.segments.back().objective_at_end;
  CHECK(std::abs(attained - floor) / floor < 1e-6);
}

TEST_CASE("interior knots cost exactly one extra jacobian each") {
  Rng rng(507);
  const int m = 6, n = 8;
  const Matrix w = rng.gaussian_matrix(m, n);
  const SigmoidModel inner(w);
  const Vector y = Vector::Constant(m, 0.45);
  const PriorSpectrum prior = decayed_prior(n, rng);

  for (const std::vector<double>& interior :
       {std::vector<double>{}, {0.4}, {0.2, 0.5, 0.8}}) {
    const CountingModel counted(inner);
    AdaptSelectOptions opts;
    opts.ensemble_size = 3;
    const AdaptSelectResult run = run_adapt_select(
        counted, y, prior, 0.01,
        ResampleSchedule::with_interior(1.0, interior), opts);
    REQUIRE_FALSE(run.failed);
    const auto n_interior = static_cast<int>(interior.size());
    CHECK(run.jacobian_evals == n_interior + 1);
    CHECK(counted.jacobian_calls() == n_interior + 1);
    CHECK(run.segments.size() == static_cast<std::size_t>(n_interior + 1));
    CHECK(run.objective_log.size() ==
          static_cast<std::size_t>(2 * (n_interior + 1)));
    CHECK(run.time_reached == 1.0);
  }
}

TEST_CASE("segment logs track knots and non-increasing linear objectives") {
  Rng rng(508);
  const int m = 7, n = 9;
  const Matrix a = rng.gaussian_matrix(m, n);
  const Vector y = rng.gaussian_vector(m);
  const PriorSpectrum prior = decayed_prior(n, rng);

  AdaptSelectOptions opts;
  opts.ensemble_size = 4;
  const ResampleSchedule schedule =
      ResampleSchedule::with_interior(2.0, {0.7, 1.4});
  const AdaptSelectResult run =
      run_adapt_select(LinearModel(a), y, prior, 0.1, schedule, opts);
  REQUIRE_FALSE(run.failed);
  REQUIRE(run.segments.size() == 3);
  for (std::size_t s = 0; s < run.segments.size(); ++s) {
    const SegmentLog& log = run.segments[s];
    CHECK(log.t_begin == schedule.knots()[s]);
    CHECK(log.t_end == schedule.knots()[s + 1]);
    CHECK(log.indices.size() == 4);
    // Linear flows descend the weighted objective within a segment.
    CHECK(log.objective_at_end <=
          log.objective_after_resample + 1e-9 * (1.0 + log.objective_at_end));
  }
  // Knot states correspond to segment ends.
  CHECK(run.knot_states.size() == 3);
}
