#pragma once

// Adaptive subspace re-selection for nonlinear inversion.
//
// The nonlinear objective Phi(u) = 1/2 |G(u) - y|^2 + (beta/2) |u|^2_R is
// attacked in segments: at each resampling time the model is linearised at
// the current ensemble mean u_bar,
//
//   A = dG(u_bar),   y~ = y - G(u_bar),   mu = -u_bar,
//
// which turns Phi, in the shifted variable u - u_bar and up to the
// linearisation error of G alone, into the weighted linear problem the
// subspace machinery handles.  A fresh index set and mixing matrix are
// selected for that problem, the ensemble is rebuilt as
// u^(i) = u_bar + V_J B e_i, and the flow of the *original* augmented
// problem is integrated to the next knot.  One Jacobian evaluation is spent
// per segment, so a schedule with N interior resampling times costs exactly
// N + 1 Jacobian evaluations.

#include "ekisel/eki.hpp"
#include "ekisel/ensemble.hpp"
#include "ekisel/forward_model.hpp"
#include "ekisel/subspace.hpp"
#include "ekisel/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace ekisel {

// Strictly increasing knots 0 = t_0 < t_1 < ... < t_{N+1} = horizon; the
// ensemble is (re)built at t_0 .. t_N and integrated across each interval.
class ResampleSchedule {
 public:
  explicit ResampleSchedule(std::vector<double> knots);

  // {0, horizon}: a single selection at t = 0, no interior resampling.
  static ResampleSchedule single_run(double horizon);
  // {0, interior..., horizon}.
  static ResampleSchedule with_interior(double horizon,
                                        std::vector<double> interior);

  const std::vector<double>& knots() const { return knots_; }
  int segment_count() const { return static_cast<int>(knots_.size()) - 1; }
  int resample_count() const { return segment_count() - 1; }
  double horizon() const { return knots_.back(); }

 private:
  std::vector<double> knots_;
};

struct LinearizationPoint {
  Matrix a;        // dG(u_bar)
  Vector y_tilde;  // y - G(u_bar)
  Vector mu;       // -u_bar
};

// One Jacobian evaluation plus one forward apply.
LinearizationPoint linearize(const ForwardModel& model, const Vector& u_bar,
                             const Vector& y);

enum class Selector { Greedy, Dominant };
enum class MixBuilder { State, Projection };

struct ResampleOptions {
  Selector selector = Selector::Greedy;
  MixBuilder builder = MixBuilder::State;
  int ensemble_size = 5;  // >= 2
};

struct ResampleStep {
  Ensemble ensemble;
  std::vector<int> indices;
  Matrix mixing;
  // True when the optimal mixing construction degenerated (restricted
  // minimiser numerically zero) and diag(sqrt(lambda_J)) was used instead.
  bool used_standard_fallback = false;
};

// Selection + rebuild around an explicit mean for an already-linearised
// problem (prob.lambda must be the effective spectrum).
ResampleStep resample_at_mean(const Vector& u_bar,
                              const LinearProblemSpec& prob,
                              const ResampleOptions& opts);

// Full resampling step from an ensemble state: linearise at the mean, build
// the local problem and rebuild the particles.
ResampleStep resample(const Ensemble& state, const ForwardModel& model,
                      const Vector& y, const PriorSpectrum& prior, double beta,
                      const ResampleOptions& opts);

struct AdaptSelectOptions {
  Selector selector = Selector::Greedy;
  MixBuilder builder = MixBuilder::State;
  int ensemble_size = 5;
  OdeOptions ode{1e-6, 1e-12, 1'000'000};
};

struct SegmentLog {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<int> indices;
  bool used_standard_fallback = false;
  double objective_after_resample = 0.0;  // Phi at the rebuilt mean
  double objective_at_end = 0.0;          // Phi at the integrated mean
};

struct AdaptSelectResult {
  std::vector<Ensemble> knot_states;  // ensemble after each completed segment
  std::vector<SegmentLog> segments;
  std::vector<std::pair<double, double>> objective_log;  // (t, Phi(mean))
  int jacobian_evals = 0;
  bool failed = false;
  double time_reached = 0.0;
  std::string error;

  const Ensemble& final_state() const { return knot_states.back(); }
};

// Runs the full resample-integrate loop for Phi with prior mean zero.
// On integration failure the trajectory completed so far is returned with
// failed = true and the time reached.
AdaptSelectResult run_adapt_select(const ForwardModel& model, const Vector& y,
                                   const PriorSpectrum& prior, double beta,
                                   const ResampleSchedule& schedule,
                                   const AdaptSelectOptions& opts);

}  // namespace ekisel
