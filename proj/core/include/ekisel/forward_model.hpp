#pragma once

#include "ekisel/types.hpp"

namespace ekisel {

// A (possibly nonlinear) forward operator G : R^n -> R^m.
//
// The default jacobian() uses central finite differences with the per-
// coordinate step h_j = fd_step * max(1, |u_j|); models with cheap analytic
// derivatives should override it.
class ForwardModel {
 public:
  virtual ~ForwardModel() = default;

  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;

  virtual Vector apply(const Vector& u) const = 0;
  virtual Matrix jacobian(const Vector& u) const;

  // Step scale for the finite-difference fallback.
  virtual double fd_step() const { return 1e-5; }
};

// G(u) = A u.
class LinearModel final : public ForwardModel {
 public:
  explicit LinearModel(Matrix a);

  int input_dim() const override { return static_cast<int>(a_.cols()); }
  int output_dim() const override { return static_cast<int>(a_.rows()); }

  Vector apply(const Vector& u) const override;
  Matrix jacobian(const Vector& u) const override;

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
};

// Counts apply/jacobian calls on a wrapped model; used to audit derivative
// budgets in tests and experiment records.
class CountingModel final : public ForwardModel {
 public:
  explicit CountingModel(const ForwardModel& inner) : inner_(inner) {}

  int input_dim() const override { return inner_.input_dim(); }
  int output_dim() const override { return inner_.output_dim(); }

  Vector apply(const Vector& u) const override {
    ++apply_calls_;
    return inner_.apply(u);
  }
  Matrix jacobian(const Vector& u) const override {
    ++jacobian_calls_;
    return inner_.jacobian(u);
  }
  double fd_step() const override { return inner_.fd_step(); }

  long apply_calls() const { return apply_calls_; }
  long jacobian_calls() const { return jacobian_calls_; }

 private:
  const ForwardModel& inner_;
  mutable long apply_calls_ = 0;
  mutable long jacobian_calls_ = 0;
};

}  // namespace ekisel
