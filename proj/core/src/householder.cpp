#include "ekisel/householder.hpp"

#include <cmath>

namespace ekisel {

Matrix reflection_mapping(const Vector& from, const Vector& to, double tol) {
  const Eigen::Index n = from.size();
  if (to.size() != n)
    throw InvalidInput("reflection_mapping: dimension mismatch");
  if (std::abs(from.norm() - 1.0) > 1e-8 || std::abs(to.norm() - 1.0) > 1e-8)
    throw InvalidInput("reflection_mapping: inputs must be unit vectors");

  if ((from - to).norm() < tol) return Matrix::Identity(n, n);

  if ((from + to).norm() < tol) {
    // Antipodal: point reflection through a direction orthogonal to `from`.
    Vector w = Vector::Zero(n);
    for (int axis = 0; axis < 2 && axis < n; ++axis) {
      Vector candidate = Vector::Unit(n, axis) - from[axis] * from;
      if (candidate.norm() > 0.5) {  // |e_k - (e_k.f) f| = sqrt(1 - f_k^2)
        w = candidate / candidate.norm();
        break;
      }
    }
    if (w.norm() == 0.0)
      throw NumericalDegeneracy("reflection_mapping: no orthogonal direction");
    return 2.0 * w * w.transpose() - Matrix::Identity(n, n);
  }

  const Vector w = (from - to).normalized();
  return Matrix::Identity(n, n) - 2.0 * w * w.transpose();
}

}  // namespace ekisel
