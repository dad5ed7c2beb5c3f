#include "ekisel/resampling.hpp"

#include <algorithm>
#include <cmath>

namespace ekisel {

ResampleSchedule::ResampleSchedule(std::vector<double> knots)
    : knots_(std::move(knots)) {
  if (knots_.size() < 2)
    throw InvalidInput("schedule needs at least {0, horizon}");
  if (knots_.front() != 0.0) throw InvalidInput("schedule must start at 0");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] > knots_[i - 1]))
      throw InvalidInput("schedule knots must be strictly increasing");
    if (!std::isfinite(knots_[i]))
      throw InvalidInput("schedule knots must be finite");
  }
}

ResampleSchedule ResampleSchedule::single_run(double horizon) {
  return ResampleSchedule({0.0, horizon});
}

ResampleSchedule ResampleSchedule::with_interior(double horizon,
                                                 std::vector<double> interior) {
  std::vector<double> knots;
  knots.push_back(0.0);
  std::sort(interior.begin(), interior.end());
  for (double t : interior) knots.push_back(t);
  knots.push_back(horizon);
  return ResampleSchedule(std::move(knots));
}

LinearizationPoint linearize(const ForwardModel& model, const Vector& u_bar,
                             const Vector& y) {
  if (u_bar.size() != model.input_dim())
    throw InvalidInput("linearize: state dimension mismatch");
  if (y.size() != model.output_dim())
    throw InvalidInput("linearize: data dimension mismatch");
  LinearizationPoint lin;
  lin.a = model.jacobian(u_bar);
  lin.y_tilde = y - model.apply(u_bar);
  lin.mu = -u_bar;
  return lin;
}

ResampleStep resample_at_mean(const Vector& u_bar,
                              const LinearProblemSpec& prob,
                              const ResampleOptions& opts) {
  if (opts.ensemble_size < 2)
    throw InvalidInput("resample: ensemble size must be at least 2");
  if (opts.ensemble_size > prob.state_dim())
    throw InvalidInput("resample: ensemble size exceeds state dimension");
  if (u_bar.size() != prob.state_dim())
    throw InvalidInput("resample: mean dimension mismatch");

  std::vector<int> indices;
  switch (opts.selector) {
    case Selector::Greedy:
      indices = greedy_select(prob, opts.ensemble_size).indices;
      break;
    case Selector::Dominant:
      indices = dominant_select(prob, opts.ensemble_size);
      break;
  }

  Matrix mixing;
  bool fallback = false;
  try {
    mixing = (opts.builder == MixBuilder::State)
                 ? optimal_mixing_state(indices, prob)
                 : optimal_mixing_projection(indices, prob);
  } catch (const NumericalDegeneracy&) {
    mixing = standard_mixing(indices, prob);
    fallback = true;
  }

  Matrix particles(prob.state_dim(), opts.ensemble_size);
  particles.colwise() = u_bar;
  for (int k = 0; k < opts.ensemble_size; ++k)
    particles += prob.v.col(indices[k]) * mixing.row(k);

  ResampleStep step{Ensemble(std::move(particles)), std::move(indices),
                    std::move(mixing), fallback};
  return step;
}

ResampleStep resample(const Ensemble& state, const ForwardModel& model,
                      const Vector& y, const PriorSpectrum& prior, double beta,
                      const ResampleOptions& opts) {
  if (!(beta > 0.0)) throw InvalidInput("resample: beta must be > 0");
  const Vector u_bar = state.mean();
  const LinearizationPoint lin = linearize(model, u_bar, y);
  const LinearProblemSpec prob(lin.a, lin.y_tilde, lin.mu, prior.v,
                               prior.lambda / beta);
  return resample_at_mean(u_bar, prob, opts);
}

AdaptSelectResult run_adapt_select(const ForwardModel& model, const Vector& y,
                                   const PriorSpectrum& prior, double beta,
                                   const ResampleSchedule& schedule,
                                   const AdaptSelectOptions& opts) {
  const int n = model.input_dim();
  const AugmentedProblem augmented(model, prior, beta, y, Vector::Zero(n));
  const Vector lambda_eff = prior.lambda / beta;

  AdaptSelectResult result;
  Vector mu = Vector::Zero(n);  // linearisation shift: minus the current mean

  const ResampleOptions step_opts{opts.selector, opts.builder,
                                  opts.ensemble_size};
  const auto& knots = schedule.knots();

  for (int seg = 0; seg < schedule.segment_count(); ++seg) {
    SegmentLog log;
    log.t_begin = knots[seg];
    log.t_end = knots[seg + 1];

    try {
      const Vector u_bar = -mu;

      const LinearizationPoint lin = linearize(model, u_bar, y);
      ++result.jacobian_evals;
      const LinearProblemSpec prob(lin.a, lin.y_tilde, lin.mu, prior.v,
                                   lambda_eff);
      ResampleStep step = resample_at_mean(u_bar, prob, step_opts);

      log.indices = step.indices;
      log.used_standard_fallback = step.used_standard_fallback;
      log.objective_after_resample = augmented.objective(step.ensemble.mean());
      result.objective_log.emplace_back(log.t_begin,
                                        log.objective_after_resample);

      try {
        Ensemble advanced =
            eki_integrate(step.ensemble, augmented.augmented_model(),
                          augmented.augmented_data(),
                          knots[seg + 1] - knots[seg], opts.ode);
        log.objective_at_end = augmented.objective(advanced.mean());
        result.objective_log.emplace_back(log.t_end, log.objective_at_end);
        result.segments.push_back(std::move(log));
        mu = -advanced.mean();
        result.knot_states.push_back(std::move(advanced));
        result.time_reached = knots[seg + 1];
      } catch (const IntegrationFailure& failure) {
        result.failed = true;
        result.time_reached = knots[seg] + failure.time_reached();
        result.error = failure.what();
        result.segments.push_back(std::move(log));
        if (result.knot_states.empty())
          result.knot_states.push_back(step.ensemble);
        break;
      }
    } catch (const NumericalDegeneracy& failure) {
      // Forward evaluation left the representable range (e.g. coefficient
      // overflow); keep whatever states were reached and stop this run.
      result.failed = true;
      result.time_reached = knots[seg];
      result.error = failure.what();
      result.segments.push_back(std::move(log));
      break;
    }
  }
  return result;
}

}  // namespace ekisel
