#include "ekisel/linear_dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace ekisel {

namespace {

void check_dims(const Ensemble& initial, const Matrix& a, const Vector& y) {
  if (a.cols() != initial.dim())
    throw InvalidInput("linear dynamics: operator/ensemble dimension mismatch");
  if (y.size() != a.rows())
    throw InvalidInput("linear dynamics: data dimension mismatch");
}

void check_time(double t) {
  if (!(t >= 0.0)) throw InvalidInput("linear dynamics: time must be >= 0");
}

// diag((1 + 2 sigma t)^(-1/2))
Vector shrink_factors(const Vector& sigma, double t) {
  return (1.0 + 2.0 * t * sigma.array()).rsqrt().matrix();
}

}  // namespace

SpectralFactorization factorize(const Matrix& a, const Ensemble& initial,
                                double rank_tol) {
  if (a.cols() != initial.dim())
    throw InvalidInput("factorize: operator/ensemble dimension mismatch");
  if (!(rank_tol >= 0.0)) throw InvalidInput("factorize: rank_tol must be >= 0");

  const double sqrt_j = std::sqrt(static_cast<double>(initial.size()));
  const Matrix scaled = (a * initial.deviations()) / sqrt_j;

  Eigen::JacobiSVD<Matrix> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& singulars = svd.singularValues();

  SpectralFactorization fact;
  fact.rank_tolerance = rank_tol;
  if (singulars.size() == 0 || singulars[0] == 0.0) {
    fact.u_img.resize(a.rows(), 0);
    fact.v_coef.resize(initial.size(), 0);
    fact.sigma.resize(0);
    return fact;
  }

  const double cutoff = rank_tol * singulars[0] * singulars[0];
  int rank = 0;
  while (rank < singulars.size() &&
         singulars[rank] * singulars[rank] > cutoff)
    ++rank;

  fact.rank = rank;
  fact.u_img = svd.matrixU().leftCols(rank);
  fact.v_coef = svd.matrixV().leftCols(rank);
  fact.sigma = singulars.head(rank).array().square().matrix();
  return fact;
}

Matrix particles_at(const Ensemble& initial, const Matrix& a, const Vector& y,
                    const SpectralFactorization& fact, double t) {
  check_dims(initial, a, y);
  check_time(t);
  if (fact.rank == 0) return initial.particles();

  const Matrix& u0 = initial.particles();
  const Matrix residuals0 = (a * u0).colwise() - y;
  const Vector gain = (shrink_factors(fact.sigma, t).array() - 1.0) /
                      fact.sigma.array();
  // (A C_0)^T U = C_0 A^T U; C_0 = (1/J) E_0 E_0^T.
  const Matrix dev = initial.deviations();
  const Matrix c0_at_u =
      dev * (dev.transpose() * (a.transpose() * fact.u_img)) /
      static_cast<double>(initial.size());
  return u0 + c0_at_u * gain.asDiagonal() *
                  (fact.u_img.transpose() * residuals0);
}

Matrix particles_at_ensemble_form(const Ensemble& initial, const Matrix& a,
                                  const Vector& y,
                                  const SpectralFactorization& fact, double t) {
  check_dims(initial, a, y);
  check_time(t);
  if (fact.rank == 0) return initial.particles();

  const Matrix& u0 = initial.particles();
  const Matrix residuals0 = (a * u0).colwise() - y;
  const Vector gain = (shrink_factors(fact.sigma, t).array() - 1.0) /
                      fact.sigma.array().sqrt();
  const double sqrt_j = std::sqrt(static_cast<double>(initial.size()));
  return u0 + (initial.deviations() * fact.v_coef / sqrt_j) *
                  gain.asDiagonal() * (fact.u_img.transpose() * residuals0);
}

Matrix particles_limit(const Ensemble& initial, const Matrix& a,
                       const Vector& y, const SpectralFactorization& fact) {
  check_dims(initial, a, y);
  if (fact.rank == 0) return initial.particles();

  const Matrix& u0 = initial.particles();
  const Matrix residuals0 = (a * u0).colwise() - y;
  const Matrix dev = initial.deviations();
  const Matrix c0_at_u =
      dev * (dev.transpose() * (a.transpose() * fact.u_img)) /
      static_cast<double>(initial.size());
  return u0 - c0_at_u * fact.sigma.cwiseInverse().asDiagonal() *
                  (fact.u_img.transpose() * residuals0);
}

Matrix residuals_at(const Ensemble& initial, const Matrix& a, const Vector& y,
                    const SpectralFactorization& fact, double t) {
  check_dims(initial, a, y);
  check_time(t);
  const Matrix residuals0 = (a * initial.particles()).colwise() - y;
  if (fact.rank == 0) return residuals0;
  const Matrix projected = fact.u_img.transpose() * residuals0;
  return residuals0 +
         fact.u_img *
             ((shrink_factors(fact.sigma, t).array() - 1.0).matrix().asDiagonal() *
              projected);
}

Matrix residuals_limit(const Ensemble& initial, const Matrix& a,
                       const Vector& y, const SpectralFactorization& fact) {
  check_dims(initial, a, y);
  const Matrix residuals0 = (a * initial.particles()).colwise() - y;
  if (fact.rank == 0) return residuals0;
  return residuals0 - fact.u_img * (fact.u_img.transpose() * residuals0);
}

Matrix deviations_at(const Ensemble& initial, const SpectralFactorization& fact,
                     double t) {
  check_time(t);
  const Matrix dev0 = initial.deviations();
  if (fact.rank == 0) return dev0;
  const Matrix ev = dev0 * fact.v_coef;  // n x r
  return dev0 + ev * (shrink_factors(fact.sigma, t).array() - 1.0)
                         .matrix()
                         .asDiagonal() *
                    fact.v_coef.transpose();
}

Matrix deviations_limit(const Ensemble& initial,
                        const SpectralFactorization& fact) {
  const Matrix dev0 = initial.deviations();
  if (fact.rank == 0) return dev0;
  return dev0 - (dev0 * fact.v_coef) * fact.v_coef.transpose();
}

Matrix covariance_at(const Ensemble& initial, const SpectralFactorization& fact,
                     double t) {
  check_time(t);
  const Matrix dev0 = initial.deviations();
  const double j_count = static_cast<double>(initial.size());
  if (fact.rank == 0) return dev0 * dev0.transpose() / j_count;
  // (1/J) E_0 (I - V V^T + V (I + 2 S t)^-1 V^T) E_0^T
  const Vector f2 = shrink_factors(fact.sigma, t).array().square().matrix();
  const Matrix ev = dev0 * fact.v_coef;
  return (dev0 * dev0.transpose() - ev * ev.transpose() +
          ev * f2.asDiagonal() * ev.transpose()) /
         j_count;
}

Matrix covariance_limit(const Ensemble& initial,
                        const SpectralFactorization& fact) {
  const Matrix dev0 = initial.deviations();
  const double j_count = static_cast<double>(initial.size());
  if (fact.rank == 0) return dev0 * dev0.transpose() / j_count;
  const Matrix ev = dev0 * fact.v_coef;
  return (dev0 * dev0.transpose() - ev * ev.transpose()) / j_count;
}

Matrix mapped_deviations_at(const SpectralFactorization& fact, double t) {
  check_time(t);
  if (fact.rank == 0)
    return Matrix::Zero(fact.u_img.rows(), fact.v_coef.rows());
  const double sqrt_j = std::sqrt(static_cast<double>(fact.v_coef.rows()));
  const Vector scale = (fact.sigma.array().sqrt() *
                        shrink_factors(fact.sigma, t).array())
                           .matrix();
  return sqrt_j * fact.u_img * scale.asDiagonal() * fact.v_coef.transpose();
}

Matrix general_covariance_at(const GeneralDynamicsSpec& spec, const Matrix& a,
                             double t, double* rcond_out) {
  if (!(spec.alpha > 0.0))
    throw InvalidInput("general dynamics: alpha must be > 0");
  check_time(t);
  if (spec.c_left.cols() != spec.c_right.rows())
    throw InvalidInput("general dynamics: split dimension mismatch");
  if (a.cols() != spec.c_left.rows())
    throw InvalidInput("general dynamics: operator dimension mismatch");

  const int p = static_cast<int>(spec.c_left.cols());
  const Matrix resolvent =
      Matrix::Identity(p, p) +
      (spec.alpha * t) * (spec.c_right * (a.transpose() * (a * spec.c_left)));
  Eigen::PartialPivLU<Matrix> lu(resolvent);
  if (rcond_out) *rcond_out = lu.rcond();
  return spec.c_left * lu.solve(spec.c_right);
}

Vector general_mean_at(const Vector& x0, const GeneralDynamicsSpec& spec,
                       const Matrix& a, const Vector& y, double t,
                       double rank_tol) {
  if (!(spec.alpha > 0.0))
    throw InvalidInput("general dynamics: alpha must be > 0");
  check_time(t);
  const Matrix c0 = spec.c_left * spec.c_right;
  if (a.cols() != c0.rows())
    throw InvalidInput("general dynamics: operator dimension mismatch");
  if (y.size() != a.rows())
    throw InvalidInput("general dynamics: data dimension mismatch");

  // Eigendecomposition of A C_0 A^T with relative rank truncation.
  const Matrix image = a * c0 * a.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(
      0.5 * (image + image.transpose()));
  const Vector& all = eig.eigenvalues();  // ascending
  const double top = all.size() ? all[all.size() - 1] : 0.0;
  if (top <= 0.0) return x0;
  const double cutoff = rank_tol * top;

  std::vector<int> keep;
  for (int i = 0; i < all.size(); ++i)
    if (all[i] > cutoff) keep.push_back(i);

  Matrix u_img(image.rows(), static_cast<int>(keep.size()));
  Vector sigma(static_cast<int>(keep.size()));
  for (int k = 0; k < static_cast<int>(keep.size()); ++k) {
    u_img.col(k) = eig.eigenvectors().col(keep[k]);
    sigma[k] = all[keep[k]];
  }

  const Vector decay =
      ((1.0 + spec.alpha * t * sigma.array()).pow(-1.0 / spec.alpha) - 1.0) /
      sigma.array();
  const Vector residual0 = a * x0 - y;
  return x0 + (c0 * a.transpose()) * u_img * decay.asDiagonal() *
                  (u_img.transpose() * residual0);
}

}  // namespace ekisel
