#pragma once

// Deterministic (noise-free) continuous-time ensemble Kalman inversion.
//
// For particles u^(1..J), forward map G and data y, each particle follows
//
//   du^(i)/dt = (1/J) sum_k < G(u^(k)) - G_bar , y - G(u^(i)) > (u^(k) - u_bar)
//
// or, collecting state deviations E, output deviations D and residuals
// S = [y - G(u^(i))]_i column-wise,
//
//   dU/dt = (1/J) E D^T S.
//
// For linear G(u) = A u this is the preconditioned gradient flow
// dU/dt = -C_t A^T (A U - Y) with C_t the ensemble covariance, so the flow
// stays inside the affine span of the initial ensemble and the data misfit
// of every particle is non-increasing.
//
// Regularised least squares  Phi(u) = 1/2 |G(u) - y|^2 + (beta/2) |u - mu|^2_R
// (with |v|^2_R = v^T R^-1 v) is handled by stacking prior rows onto the
// operator: with R = V diag(lambda) V^T and lambda_eff = lambda / beta,
//
//   G_aug(u) = [ G(u) ; diag(lambda_eff)^-1/2 V^T u ],
//   y_aug    = [ y    ; diag(lambda_eff)^-1/2 V^T mu ],
//
// which satisfies Phi(u) = 1/2 |G_aug(u) - y_aug|^2 exactly.

#include "ekisel/ensemble.hpp"
#include "ekisel/forward_model.hpp"
#include "ekisel/ode.hpp"
#include "ekisel/types.hpp"

namespace ekisel {

// Ensemble velocity dU/dt = (1/J) E D^T S for the current particle matrix.
Matrix eki_rhs(const Matrix& particles, const ForwardModel& model,
               const Vector& y);

// Integrates the particle flow from t = 0 to t = horizon.
Ensemble eki_integrate(const Ensemble& initial, const ForwardModel& model,
                       const Vector& y, double horizon,
                       const OdeOptions& opts = {}, OdeStats* stats = nullptr);

// Prior spectrum R = V diag(lambda) V^T with orthonormal V.
struct PriorSpectrum {
  Matrix v;
  Vector lambda;
};

// Bundles a forward model with data and a Gaussian prior into the augmented
// least-squares problem described above.
class AugmentedProblem {
 public:
  // `model` must outlive the problem.  Requires orthonormal prior
  // eigenvectors (V^T V = I to 1e-10), strictly positive eigenvalues and
  // beta > 0.  `mu` is the prior mean.
  AugmentedProblem(const ForwardModel& model, PriorSpectrum prior, double beta,
                   Vector y, Vector mu);

  // Phi(u) = 1/2 |G(u) - y|^2 + (beta/2) |u - mu|^2_R, evaluated directly
  // (one forward apply, no augmented rows).
  double objective(const Vector& u) const;

  const ForwardModel& base_model() const { return *model_; }
  const ForwardModel& augmented_model() const { return augmented_; }
  const Vector& augmented_data() const { return y_aug_; }

  const Matrix& prior_v() const { return prior_.v; }
  const Vector& prior_lambda() const { return prior_.lambda; }
  const Vector& lambda_eff() const { return lambda_eff_; }
  double beta() const { return beta_; }
  const Vector& data() const { return y_; }
  const Vector& prior_mean() const { return mu_; }

 private:
  class StackedModel final : public ForwardModel {
   public:
    explicit StackedModel(const AugmentedProblem* p) : p_(p) {}
    int input_dim() const override { return p_->model_->input_dim(); }
    int output_dim() const override {
      return p_->model_->output_dim() + static_cast<int>(p_->prior_.v.cols());
    }
    Vector apply(const Vector& u) const override;
    Matrix jacobian(const Vector& u) const override;
    double fd_step() const override { return p_->model_->fd_step(); }

   private:
    const AugmentedProblem* p_;
  };

  const ForwardModel* model_;
  PriorSpectrum prior_;
  double beta_;
  Vector y_;
  Vector mu_;
  Vector lambda_eff_;    // lambda / beta
  Matrix prior_rows_;    // diag(lambda_eff)^-1/2 V^T
  Vector y_aug_;
  StackedModel augmented_;
};

}  // namespace ekisel
