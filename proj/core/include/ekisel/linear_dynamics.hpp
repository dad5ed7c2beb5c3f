#pragma once

// Closed-form solution of the deterministic EKI flow for a linear forward
// map G(u) = A u, driven by the joint spectrum of the initial ensemble and
// the operator.
//
// With initial deviations E_0 and C_0 = (1/J) E_0 E_0^T, factor
//
//   A C_0 A^T = U S U^T,     A E_0 = sqrt(J) U S^(1/2) V^T,
//
// where U (m x r) and V (J x r) have orthonormal columns and S holds the
// positive eigenvalues.  Writing F(t) = (I_r + 2 S t)^(-1/2), the flow
// dU/dt = -C_t A^T (A U - Y) has the explicit solution
//
//   particles   u^(i)(t) = u^(i)(0)
//                + (A C_0)^T U S^-1 (F(t) - I) U^T (A u^(i)(0) - y)
//   residuals   A u^(i)(t) - y
//                = (I - U U^T + U F(t) U^T) (A u^(i)(0) - y)
//   deviations  E_t = E_0 (I_J - V V^T + V F(t) V^T)
//   covariance  C_t = (1/J) E_0 (I_J - V V^T + V F(t)^2 V^T) E_0^T
//   image       A E_t = sqrt(J) U S^(1/2) F(t) V^T        (decay ~ t^-1/2)
//
// As t -> infinity F(t) -> 0, so residuals converge to the projection
// (I - U U^T)(A u^(i)(0) - y) and the ensemble spread orthogonal to V
// freezes.  An equivalent particle update purely in ensemble coordinates is
//
//   u^(i)(t) = u^(i)(0)
//              + (1/sqrt(J)) E_0 V S^(-1/2) (F(t) - I) U^T (A u^(i)(0) - y),
//
// exposed separately as a cross-check.
//
// The same flow with relaxation exponent alpha (deterministic choice is
// alpha = 2) and a general covariance split C_0 = C_L C_R admits
//
//   C_t = C_L (I_p + alpha C_R A^T A C_L t)^-1 C_R,
//   x_t = x_0 + (A C_0)^T U S^-1 ((I + alpha S t)^(-1/alpha) - I) U^T (A x_0 - y)
//
// for the mean path x_t of the associated mean-field dynamics.

#include "ekisel/ensemble.hpp"
#include "ekisel/types.hpp"

namespace ekisel {

struct SpectralFactorization {
  Matrix u_img;   // m x r, orthonormal columns spanning Im(A E_0)
  Vector sigma;   // r positive eigenvalues of A C_0 A^T, descending
  Matrix v_coef;  // J x r, orthonormal columns (right singular directions)
  int rank = 0;
  double rank_tolerance = 0.0;
};

// Singular value decomposition of A E_0 / sqrt(J); singular values whose
// squares fall at or below rank_tol times the largest square are truncated.
// A zero product yields an empty (rank 0) factorization.
SpectralFactorization factorize(const Matrix& a, const Ensemble& initial,
                                double rank_tol = 1e-12);

// Particle positions at time t >= 0 (operator-image form above).
Matrix particles_at(const Ensemble& initial, const Matrix& a, const Vector& y,
                    const SpectralFactorization& fact, double t);

// Same trajectory written purely in ensemble coordinates; agrees with
// particles_at to rounding and exists as an independent cross-check.
Matrix particles_at_ensemble_form(const Ensemble& initial, const Matrix& a,
                                  const Vector& y,
                                  const SpectralFactorization& fact, double t);

// t -> infinity limits.
Matrix particles_limit(const Ensemble& initial, const Matrix& a,
                       const Vector& y, const SpectralFactorization& fact);

// Residual matrix [A u^(i)(t) - y]_i and its limit.
Matrix residuals_at(const Ensemble& initial, const Matrix& a, const Vector& y,
                    const SpectralFactorization& fact, double t);
Matrix residuals_limit(const Ensemble& initial, const Matrix& a,
                       const Vector& y, const SpectralFactorization& fact);

// Ensemble deviations and covariance along the flow.
Matrix deviations_at(const Ensemble& initial, const SpectralFactorization& fact,
                     double t);
Matrix deviations_limit(const Ensemble& initial,
                        const SpectralFactorization& fact);
Matrix covariance_at(const Ensemble& initial, const SpectralFactorization& fact,
                     double t);
Matrix covariance_limit(const Ensemble& initial,
                        const SpectralFactorization& fact);

// Mapped deviations A E_t = sqrt(J) U S^(1/2) (I + 2 S t)^(-1/2) V^T.
Matrix mapped_deviations_at(const SpectralFactorization& fact, double t);

// General-alpha mean-field forms for a split covariance C_0 = C_L C_R.
struct GeneralDynamicsSpec {
  double alpha = 2.0;  // relaxation exponent, > 0
  Matrix c_left;       // n x p
  Matrix c_right;      // p x n, with C_L C_R symmetric positive semidefinite
};

// C_t = C_L (I_p + alpha C_R A^T A C_L t)^-1 C_R.  If rcond_out is non-null
// it receives the reciprocal condition number of the solved system so
// callers can flag near-singular resolvents.
Matrix general_covariance_at(const GeneralDynamicsSpec& spec, const Matrix& a,
                             double t, double* rcond_out = nullptr);

// Mean path x_t for the general-alpha flow started at x0.
Vector general_mean_at(const Vector& x0, const GeneralDynamicsSpec& spec,
                       const Matrix& a, const Vector& y, double t,
                       double rank_tol = 1e-12);

}  // namespace ekisel
