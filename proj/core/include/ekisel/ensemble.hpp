#pragma once

#include "ekisel/types.hpp"

namespace ekisel {

// An ensemble of J particles in R^n, stored as the columns of an n x J
// matrix.  Moments use the 1/J normalisation throughout:
//
//   mean       u_bar = (1/J) sum_i u^(i)
//   deviations E     = [u^(1) - u_bar, ..., u^(J) - u_bar]
//   covariance C     = (1/J) E E^T
class Ensemble {
 public:
  // Requires at least two particles and finite entries.
  explicit Ensemble(Matrix particles);

  int dim() const { return static_cast<int>(particles_.rows()); }
  int size() const { return static_cast<int>(particles_.cols()); }

  const Matrix& particles() const { return particles_; }

  Vector mean() const;
  Matrix deviations() const;
  Matrix covariance() const;

 private:
  Matrix particles_;  // n x J
};

}  // namespace ekisel
