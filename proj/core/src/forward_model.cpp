#include "ekisel/forward_model.hpp"

#include <cmath>

namespace ekisel {

Matrix ForwardModel::jacobian(const Vector& u) const {
  if (u.size() != input_dim())
    throw InvalidInput("jacobian: input dimension mismatch");
  Matrix jac(output_dim(), input_dim());
  Vector probe = u;
  for (int j = 0; j < input_dim(); ++j) {
    const double h = fd_step() * std::max(1.0, std::abs(u[j]));
    probe[j] = u[j] + h;
    const Vector plus = apply(probe);
    probe[j] = u[j] - h;
    const Vector minus = apply(probe);
    probe[j] = u[j];
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

LinearModel::LinearModel(Matrix a) : a_(std::move(a)) {
  if (a_.rows() < 1 || a_.cols() < 1)
    throw InvalidInput("LinearModel requires a non-empty matrix");
  if (!a_.allFinite()) throw InvalidInput("LinearModel matrix must be finite");
}

Vector LinearModel::apply(const Vector& u) const {
  if (u.size() != a_.cols())
    throw InvalidInput("LinearModel::apply: input dimension mismatch");
  return a_ * u;
}

Matrix LinearModel::jacobian(const Vector&) const { return a_; }

}  // namespace ekisel
