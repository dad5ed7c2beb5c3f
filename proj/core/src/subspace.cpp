#include "ekisel/subspace.hpp"

#include "ekisel/householder.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ekisel {

namespace {

void check_indices(const std::vector<int>& indices, int n) {
  if (indices.empty()) throw InvalidInput("index set must be non-empty");
  std::vector<char> seen(n, 0);
  for (int j : indices) {
    if (j < 0 || j >= n) throw InvalidInput("index out of range");
    if (seen[j]) throw InvalidInput("index set must be distinct");
    seen[j] = 1;
  }
}

Matrix columns(const Matrix& m, const std::vector<int>& indices) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k)
    out.col(static_cast<Eigen::Index>(k)) = m.col(indices[k]);
  return out;
}

Vector entries(const Vector& v, const std::vector<int>& indices) {
  Vector out(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = v[indices[k]];
  return out;
}

// Symmetric PSD square root and inverse square root.
void spd_sqrt(const Matrix& m, Matrix* root, Matrix* inv_root) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw NumericalDegeneracy("matrix square root: non-positive eigenvalue");
  const Vector sq = eig.eigenvalues().cwiseSqrt();
  if (root)
    *root = eig.eigenvectors() * sq.asDiagonal() * eig.eigenvectors().transpose();
  if (inv_root)
    *inv_root = eig.eigenvectors() * sq.cwiseInverse().asDiagonal() *
                eig.eigenvectors().transpose();
}

std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  // C(n, k) but saturating just above cap to avoid overflow.
  long double value = 1.0L;
  for (int i = 1; i <= k; ++i) {
    value *= static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (value > static_cast<long double>(cap) * 2.0L)
      return cap + 1;
  }
  return static_cast<std::uint64_t>(value + 0.5L);
}

}  // namespace

LinearProblemSpec::LinearProblemSpec(Matrix a_in, Vector y_in, Vector mu_in,
                                     Matrix v_in, Vector lambda_in)
    : a(std::move(a_in)),
      y(std::move(y_in)),
      mu(std::move(mu_in)),
      v(std::move(v_in)),
      lambda(std::move(lambda_in)) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (y.size() != m) throw InvalidInput("problem spec: data dimension mismatch");
  if (mu.size() != n) throw InvalidInput("problem spec: shift dimension mismatch");
  if (v.rows() != n || v.cols() != n)
    throw InvalidInput("problem spec: eigenvector matrix must be n x n");
  if (lambda.size() != n)
    throw InvalidInput("problem spec: eigenvalue count mismatch");
  if (!a.allFinite() || !y.allFinite() || !mu.allFinite() || !v.allFinite() ||
      !lambda.allFinite())
    throw InvalidInput("problem spec: entries must be finite");
  if ((lambda.array() <= 0.0).any())
    throw InvalidInput("problem spec: eigenvalues must be positive");
  const Matrix gram = v.transpose() * v;
  if ((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInput("problem spec: eigenvectors must be orthonormal");
}

SubspaceChoice::SubspaceChoice(std::vector<int> indices_in, Matrix mixing_in)
    : indices(std::move(indices_in)), mixing(std::move(mixing_in)) {
  if (indices.empty()) throw InvalidInput("subspace choice: empty index set");
  std::vector<int> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("subspace choice: indices must be distinct");
  if (sorted.front() < 0) throw InvalidInput("subspace choice: negative index");
  const auto count = static_cast<Eigen::Index>(indices.size());
  if (mixing.rows() != count || mixing.cols() != count)
    throw InvalidInput("subspace choice: mixing matrix must be |J| x |J|");
  if (!mixing.allFinite())
    throw InvalidInput("subspace choice: mixing matrix must be finite");
  Eigen::JacobiSVD<Matrix> svd(mixing);
  const double smax = svd.singularValues()[0];
  const double smin = svd.singularValues()[count - 1];
  if (!(smax > 0.0) || smin < 1e-12 * smax)
    throw InvalidInput("subspace choice: mixing matrix is numerically singular");
}

LongRunTerms long_run_terms(const std::vector<int>& indices,
                            const LinearProblemSpec& prob) {
  check_indices(indices, prob.state_dim());
  LongRunTerms terms;
  terms.indices = indices;

  const Matrix v_sub = columns(prob.v, indices);
  const Vector lambda_sub = entries(prob.lambda, indices);
  terms.a_sub = prob.a * v_sub;

  const auto count = static_cast<Eigen::Index>(indices.size());
  Matrix precision = terms.a_sub.transpose() * terms.a_sub;
  precision.diagonal() += lambda_sub.cwiseInverse();
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success)
    throw NumericalDegeneracy("long_run_terms: precision not positive definite");
  terms.m_sub = llt.solve(Matrix::Identity(count, count));

  const Vector mu_coef = v_sub.transpose() * prob.mu;
  terms.z = prob.y - terms.a_sub * mu_coef;
  terms.target = terms.m_sub * (terms.a_sub.transpose() * prob.y +
                                lambda_sub.cwiseInverse().cwiseProduct(mu_coef));

  const Vector all_coef = prob.v.transpose() * prob.mu;
  double tail = (all_coef.array().square() / prob.lambda.array()).sum();
  tail -= (mu_coef.array().square() / lambda_sub.array()).sum();
  terms.prior_tail = std::max(0.0, tail);

  const Vector az = terms.a_sub.transpose() * terms.z;
  terms.floor = terms.z.squaredNorm() - az.dot(terms.m_sub * az) +
                terms.prior_tail;
  return terms;
}

double lower_bound(const std::vector<int>& indices,
                   const LinearProblemSpec& prob) {
  return long_run_terms(indices, prob).floor;
}

double long_run_objective(const SubspaceChoice& choice,
                          const LinearProblemSpec& prob) {
  const LongRunTerms terms = long_run_terms(choice.indices, prob);
  const auto count = static_cast<Eigen::Index>(choice.indices.size());
  const Vector w = Eigen::PartialPivLU<Matrix>(choice.mixing.transpose())
                       .solve(Vector::Ones(count));  // B^-T 1
  const double coupling = terms.target.dot(w);       // 1^T B^-1 zt
  const double denom = w.dot(terms.m_sub * w);
  if (!(denom > 0.0))
    throw NumericalDegeneracy("long_run_objective: vanishing denominator");
  const double excess = (1.0 - coupling) * (1.0 - coupling) / denom;
  return terms.floor + excess;
}

bool is_optimal_mixing(const SubspaceChoice& choice,
                       const LinearProblemSpec& prob, double tol) {
  const LongRunTerms terms = long_run_terms(choice.indices, prob);
  const auto count = static_cast<Eigen::Index>(choice.indices.size());
  const Vector w = Eigen::PartialPivLU<Matrix>(choice.mixing.transpose())
                       .solve(Vector::Ones(count));
  return std::abs(terms.target.dot(w) - 1.0) <= tol;
}

Matrix standard_mixing(const std::vector<int>& indices,
                       const LinearProblemSpec& prob) {
  check_indices(indices, prob.state_dim());
  return entries(prob.lambda, indices).cwiseSqrt().asDiagonal();
}

namespace {

// Common degenerate-target guard: |zt| measured against the scale of the
// data entering it.
void check_target(const LongRunTerms& terms) {
  const double scale =
      std::max(1.0, terms.m_sub.norm() * (terms.a_sub.norm() + terms.z.norm() +
                                          std::sqrt(terms.prior_tail + 1.0)));
  if (terms.target.norm() < 1e-14 * scale)
    throw NumericalDegeneracy(
        "optimal mixing: restricted minimiser is numerically zero");
}

}  // namespace

Matrix optimal_mixing_state(const std::vector<int>& indices,
                            const LinearProblemSpec& prob) {
  const LongRunTerms terms = long_run_terms(indices, prob);
  check_target(terms);
  const auto count = static_cast<Eigen::Index>(indices.size());
  const double sqrt_j = std::sqrt(static_cast<double>(count));
  const Vector ones_dir = Vector::Ones(count) / sqrt_j;
  const double norm = terms.target.norm();
  const Matrix u = reflection_mapping(ones_dir, terms.target / norm);
  return sqrt_j * norm * u;
}

Matrix optimal_mixing_projection(const std::vector<int>& indices,
                                 const LinearProblemSpec& prob) {
  const LongRunTerms terms = long_run_terms(indices, prob);
  check_target(terms);
  Matrix root, inv_root;
  spd_sqrt(terms.m_sub, &root, &inv_root);
  const Vector x = inv_root * terms.target;
  const double norm = x.norm();
  const auto count = static_cast<Eigen::Index>(indices.size());
  const double sqrt_j = std::sqrt(static_cast<double>(count));
  const Vector ones_dir = Vector::Ones(count) / sqrt_j;
  const Matrix u = reflection_mapping(ones_dir, x / norm);
  return sqrt_j * norm * root * u;
}

// --- greedy ---

GreedyWorkspace::GreedyWorkspace(const LinearProblemSpec& prob) {
  auto pre = std::make_shared<Precompute>();
  pre->av = prob.a * prob.v;
  pre->av_norm2 = pre->av.colwise().squaredNorm().transpose();
  pre->mu_coef = prob.v.transpose() * prob.mu;
  pre->lambda = prob.lambda;
  pre->y = prob.y;
  pre_ = std::move(pre);

  const int n = prob.state_dim();
  selected_mask_.assign(n, 0);
  p_sel_.resize(prob.data_dim(), 0);
  m_tilde_.resize(0, 0);
  z_ = pre_->y;
  prior_tail_ =
      (pre_->mu_coef.array().square() / pre_->lambda.array()).sum();
}

int GreedyWorkspace::state_dim() const {
  return static_cast<int>(selected_mask_.size());
}

double GreedyWorkspace::current_lower_bound() const {
  double quad = 0.0;
  if (selected_count() > 0) {
    const Vector g = p_sel_.transpose() * z_;
    quad = g.dot(m_tilde_ * g);
  }
  return z_.squaredNorm() - quad + prior_tail_;
}

double GreedyWorkspace::score(int j) const {
  if (j < 0 || j >= state_dim())
    throw InvalidInput("greedy score: index out of range");
  if (selected_mask_[j]) throw InvalidInput("greedy score: index already selected");

  const double c = pre_->mu_coef[j];
  const double lam = pre_->lambda[j];
  const Vector av_j = pre_->av.col(j);
  const Vector p_j = std::sqrt(lam) * av_j;
  const Vector zt = z_ - c * av_j;

  const double t1 = -2.0 * c * z_.dot(av_j);
  const double t2 = c * c * (pre_->av_norm2[j] - 1.0 / lam);

  double quad_z = 0.0;
  double cross = 0.0;
  double pivot = 1.0 + p_j.squaredNorm();
  if (selected_count() > 0) {
    const Vector g = m_tilde_ * (p_sel_.transpose() * zt);
    const Vector q = p_sel_.transpose() * p_j;
    quad_z = g.dot(p_sel_.transpose() * zt);
    cross = g.dot(q);
    pivot -= q.dot(m_tilde_ * q);
  }
  const double offset = cross - zt.dot(p_j);
  return t1 + t2 - quad_z - offset * offset / pivot;
}

GreedyWorkspace rank_one_update(const GreedyWorkspace& ws, int j) {
  if (j < 0 || j >= ws.state_dim())
    throw InvalidInput("rank_one_update: index out of range");
  if (ws.selected_mask_[j])
    throw InvalidInput("rank_one_update: index already selected");

  GreedyWorkspace next = ws;
  const auto& pre = *next.pre_;
  const double lam = pre.lambda[j];
  const Vector p_j = std::sqrt(lam) * pre.av.col(j);

  const int k = next.selected_count();
  Matrix m_next(k + 1, k + 1);
  double pivot = 1.0 + p_j.squaredNorm();
  if (k > 0) {
    const Vector q = next.p_sel_.transpose() * p_j;
    const Vector mq = next.m_tilde_ * q;
    pivot -= q.dot(mq);
    if (pivot <= 1e-12)
      throw NumericalDegeneracy("rank_one_update: pivot collapsed");
    m_next.topLeftCorner(k, k) =
        next.m_tilde_ + (mq * mq.transpose()) / pivot;
    m_next.topRightCorner(k, 1) = -mq / pivot;
    m_next.bottomLeftCorner(1, k) = -mq.transpose() / pivot;
  } else if (pivot <= 1e-12) {
    throw NumericalDegeneracy("rank_one_update: pivot collapsed");
  }
  m_next(k, k) = 1.0 / pivot;

  next.m_tilde_ = std::move(m_next);
  next.p_sel_.conservativeResize(Eigen::NoChange, k + 1);
  next.p_sel_.col(k) = p_j;
  next.z_ -= pre.mu_coef[j] * pre.av.col(j);
  next.prior_tail_ -= pre.mu_coef[j] * pre.mu_coef[j] / lam;
  next.selected_.push_back(j);
  next.selected_mask_[j] = 1;
  return next;
}

SelectionResult greedy_select(const LinearProblemSpec& prob, int count) {
  const int n = prob.state_dim();
  if (count < 1 || count > n)
    throw InvalidInput("greedy_select: count must be in [1, n]");

  GreedyWorkspace ws(prob);
  SelectionResult result;
  for (int step = 0; step < count; ++step) {
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      if (ws.is_selected(j)) continue;
      const double s = ws.score(j);
      if (s < best_score) {  // strict: ties keep the smallest index
        best_score = s;
        best = j;
      }
    }
    ws = rank_one_update(ws, best);
    result.bound_path.push_back(ws.current_lower_bound());
  }
  result.indices = ws.selected();

  // Dense recomputation of M_J for downstream consumers.
  result.m_sub = long_run_terms(result.indices, prob).m_sub;
  return result;
}

std::vector<int> dominant_select(const LinearProblemSpec& prob, int count) {
  const int n = prob.state_dim();
  if (count < 1 || count > n)
    throw InvalidInput("dominant_select: count must be in [1, n]");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return prob.lambda[a] > prob.lambda[b];
  });
  order.resize(count);
  return order;
}

std::vector<int> random_select(const LinearProblemSpec& prob, int count,
                               Rng& rng) {
  const int n = prob.state_dim();
  if (count < 1 || count > n)
    throw InvalidInput("random_select: count must be in [1, n]");
  return rng.sample_without_replacement(n, count);
}

std::vector<int> brute_force_select(const LinearProblemSpec& prob, int count,
                                    std::uint64_t cap) {
  const int n = prob.state_dim();
  if (count < 1 || count > n)
    throw InvalidInput("brute_force_select: count must be in [1, n]");
  const std::uint64_t total = binomial_capped(n, count, cap);
  if (total > cap)
    throw InvalidInput(
        "brute_force_select: C(n, count) exceeds the enumeration cap; use "
        "greedy_select for problems of this size");

  std::vector<int> current(count);
  std::iota(current.begin(), current.end(), 0);
  std::vector<int> best;
  double best_value = std::numeric_limits<double>::infinity();

  for (;;) {
    const double value = lower_bound(current, prob);
    if (value < best_value) {  // strict: first (lexicographic) set wins ties
      best_value = value;
      best = current;
    }
    // Next combination in lexicographic order.
    int pos = count - 1;
    while (pos >= 0 && current[pos] == n - count + pos) --pos;
    if (pos < 0) break;
    ++current[pos];
    for (int q = pos + 1; q < count; ++q) current[q] = current[q - 1] + 1;
  }
  return best;
}

}  // namespace ekisel
