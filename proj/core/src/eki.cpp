#include "ekisel/eki.hpp"

#include <cmath>

namespace ekisel {

Matrix eki_rhs(const Matrix& particles, const ForwardModel& model,
               const Vector& y) {
  const int n = static_cast<int>(particles.rows());
  const int j_count = static_cast<int>(particles.cols());
  if (n != model.input_dim())
    throw InvalidInput("eki_rhs: particle dimension does not match model");
  if (y.size() != model.output_dim())
    throw InvalidInput("eki_rhs: data dimension does not match model");

  Matrix outputs(model.output_dim(), j_count);
  for (int i = 0; i < j_count; ++i) outputs.col(i) = model.apply(particles.col(i));

  const Vector u_bar = particles.rowwise().mean();
  const Vector g_bar = outputs.rowwise().mean();
  const Matrix state_dev = particles.colwise() - u_bar;
  const Matrix out_dev = outputs.colwise() - g_bar;
  const Matrix residuals = (-outputs).colwise() + y;  // column i: y - G(u^(i))

  return state_dev * (out_dev.transpose() * residuals) /
         static_cast<double>(j_count);
}

Ensemble eki_integrate(const Ensemble& initial, const ForwardModel& model,
                       const Vector& y, double horizon, const OdeOptions& opts,
                       OdeStats* stats) {
  if (horizon < 0.0) throw InvalidInput("eki_integrate requires horizon >= 0");
  const int n = initial.dim();
  const int j_count = initial.size();

  const auto rhs = [&](const Vector& flat) -> Vector {
    const Eigen::Map<const Matrix> u(flat.data(), n, j_count);
    const Matrix velocity = eki_rhs(u, model, y);
    return Eigen::Map<const Vector>(velocity.data(), velocity.size());
  };

  const Matrix& u0 = initial.particles();
  Vector flat0 = Eigen::Map<const Vector>(u0.data(), u0.size());
  Vector flat_t = integrate_ode(rhs, std::move(flat0), 0.0, horizon, opts, stats);
  return Ensemble(Eigen::Map<const Matrix>(flat_t.data(), n, j_count));
}

AugmentedProblem::AugmentedProblem(const ForwardModel& model,
                                   PriorSpectrum prior, double beta, Vector y,
                                   Vector mu)
    : model_(&model),
      prior_(std::move(prior)),
      beta_(beta),
      y_(std::move(y)),
      mu_(std::move(mu)),
      augmented_(this) {
  const int n = model_->input_dim();
  if (prior_.v.rows() != n)
    throw InvalidInput("AugmentedProblem: prior eigenvector dimension mismatch");
  if (prior_.lambda.size() != prior_.v.cols())
    throw InvalidInput("AugmentedProblem: eigenvalue count mismatch");
  if (y_.size() != model_->output_dim())
    throw InvalidInput("AugmentedProblem: data dimension mismatch");
  if (mu_.size() != n)
    throw InvalidInput("AugmentedProblem: prior mean dimension mismatch");
  if (!(beta_ > 0.0)) throw InvalidInput("AugmentedProblem: beta must be > 0");
  if ((prior_.lambda.array() <= 0.0).any())
    throw InvalidInput("AugmentedProblem: prior eigenvalues must be > 0");
  const Matrix gram = prior_.v.transpose() * prior_.v;
  const double ortho_err =
      (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-10)
    throw InvalidInput("AugmentedProblem: prior eigenvectors not orthonormal");

  lambda_eff_ = prior_.lambda / beta_;
  prior_rows_ = lambda_eff_.cwiseSqrt().cwiseInverse().asDiagonal() *
                prior_.v.transpose();
  y_aug_.resize(y_.size() + prior_rows_.rows());
  y_aug_ << y_, prior_rows_ * mu_;
}

double AugmentedProblem::objective(const Vector& u) const {
  const Vector misfit = model_->apply(u) - y_;
  const Vector coeff = prior_.v.transpose() * (u - mu_);
  const double prior_term =
      (coeff.array().square() / prior_.lambda.array()).sum();
  return 0.5 * misfit.squaredNorm() + 0.5 * beta_ * prior_term;
}

Vector AugmentedProblem::StackedModel::apply(const Vector& u) const {
  Vector out(output_dim());
  out.head(p_->model_->output_dim()) = p_->model_->apply(u);
  out.tail(p_->prior_rows_.rows()) = p_->prior_rows_ * u;
  return out;
}

Matrix AugmentedProblem::StackedModel::jacobian(const Vector& u) const {
  Matrix jac(output_dim(), input_dim());
  jac.topRows(p_->model_->output_dim()) = p_->model_->jacobian(u);
  jac.bottomRows(p_->prior_rows_.rows()) = p_->prior_rows_;
  return jac;
}

}  // namespace ekisel
