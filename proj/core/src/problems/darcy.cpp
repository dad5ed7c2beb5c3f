#include "ekisel/problems/darcy.hpp"

#include <algorithm>
#include <cmath>

namespace ekisel {

namespace {

// P1 stiffness of a right triangle with the right angle at local vertex 0,
// unit coefficient; independent of the leg length in two dimensions.
constexpr double kLocalStiffness[3][3] = {
    {1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};

}  // namespace

DarcySolver::DarcySolver(int cells, double source)
    : cells_(cells), source_(source) {
  if (cells_ < 2) throw InvalidInput("DarcySolver: need at least 2 cells");

  const int n = cells_;
  node_dof_.assign(node_count(), -1);
  int next_dof = 0;
  for (int ix = 1; ix < n; ++ix)
    for (int iy = 1; iy < n; ++iy) node_dof_[node_index(ix, iy)] = next_dof++;
  dof_count_ = next_dof;

  // Two triangles per cell, right-angle vertex first; the far-edge nodes
  // take their field value from the periodic extension of the sample grid.
  const auto wrapped_sample = [&](int ix, int iy) {
    return sample_index(ix % n, iy % n);
  };
  elements_.reserve(2 * n * n);
  for (int ix = 0; ix < n; ++ix) {
    for (int iy = 0; iy < n; ++iy) {
      Element lower;
      lower.dof = {node_dof_[node_index(ix, iy)],
                   node_dof_[node_index(ix + 1, iy)],
                   node_dof_[node_index(ix, iy + 1)]};
      lower.sample = {wrapped_sample(ix, iy), wrapped_sample(ix + 1, iy),
                      wrapped_sample(ix, iy + 1)};
      elements_.push_back(lower);

      Element upper;
      upper.dof = {node_dof_[node_index(ix + 1, iy + 1)],
                   node_dof_[node_index(ix, iy + 1)],
                   node_dof_[node_index(ix + 1, iy)]};
      upper.sample = {wrapped_sample(ix + 1, iy + 1),
                      wrapped_sample(ix, iy + 1), wrapped_sample(ix + 1, iy)};
      elements_.push_back(upper);
    }
  }

  // Sparsity pattern, then cache the value-array slot of every (dof, dof)
  // pair so repeated assemblies touch the compressed storage directly.
  std::vector<Eigen::Triplet<double>> pattern;
  pattern.reserve(elements_.size() * 9);
  for (const Element& el : elements_)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (el.dof[a] >= 0 && el.dof[b] >= 0)
          pattern.emplace_back(el.dof[a], el.dof[b], 0.0);
  stiffness_.resize(dof_count_, dof_count_);
  stiffness_.setFromTriplets(pattern.begin(), pattern.end());
  stiffness_.makeCompressed();

  const auto slot_of = [&](int row, int col) {
    const int* inner = stiffness_.innerIndexPtr();
    const int begin = stiffness_.outerIndexPtr()[col];
    const int end = stiffness_.outerIndexPtr()[col + 1];
    const int* found = std::lower_bound(inner + begin, inner + end, row);
    return static_cast<int>(found - inner);
  };
  for (Element& el : elements_) {
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        el.slot[3 * a + b] = (el.dof[a] >= 0 && el.dof[b] >= 0)
                                 ? slot_of(el.dof[a], el.dof[b])
                                 : -1;
  }
  llt_.analyzePattern(stiffness_);

  // Constant source: each triangle sends f * area / 3 to its vertices.
  const double h = 1.0 / n;
  const double per_vertex = source_ * (h * h / 2.0) / 3.0;
  load_ = Vector::Zero(dof_count_);
  for (const Element& el : elements_)
    for (int a = 0; a < 3; ++a)
      if (el.dof[a] >= 0) load_[el.dof[a]] += per_vertex;

  exp_field_.resize(sample_count());
}

std::pair<double, double> DarcySolver::node_coords(int node) const {
  const int ix = node / (cells_ + 1);
  const int iy = node % (cells_ + 1);
  const double h = 1.0 / cells_;
  return {ix * h, iy * h};
}

bool DarcySolver::node_is_interior(int node) const {
  return node_dof_[node] >= 0;
}

Vector DarcySolver::solve(const Vector& log_coeff) const {
  if (log_coeff.size() != sample_count())
    throw InvalidInput("DarcySolver::solve: field must live on the sample grid");

  exp_field_ = log_coeff.array().exp();
  if (!exp_field_.allFinite())
    throw NumericalDegeneracy("DarcySolver: coefficient overflow");

  double* values = stiffness_.valuePtr();
  std::fill(values, values + stiffness_.nonZeros(), 0.0);
  for (const Element& el : elements_) {
    const double coeff = (exp_field_[el.sample[0]] + exp_field_[el.sample[1]] +
                          exp_field_[el.sample[2]]) /
                         3.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int slot = el.slot[3 * a + b];
        if (slot >= 0) values[slot] += coeff * kLocalStiffness[a][b];
      }
  }

  llt_.factorize(stiffness_);
  if (llt_.info() != Eigen::Success)
    throw NumericalDegeneracy("DarcySolver: Cholesky factorisation failed");
  Vector x = llt_.solve(load_);
  // Enforce residual < 1e-10 in the normwise backward sense
  // |b - Ax| < tol * (|A| |x| + |b|): iterative refinement reaches that for
  // any factorisable system, however extreme the coefficient contrast.
  double a_norm = 0.0;
  for (int col = 0; col < stiffness_.outerSize(); ++col) {
    double sum = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(stiffness_, col); it;
         ++it)
      sum += std::abs(it.value());
    a_norm = std::max(a_norm, sum);
  }
  Vector residual = load_ - stiffness_ * x;
  const auto scale = [&] { return a_norm * x.norm() + load_.norm(); };
  for (int step = 0; step < 3 && residual.norm() > 1e-12 * scale(); ++step) {
    x += llt_.solve(residual);
    residual = load_ - stiffness_ * x;
  }
  if (!(residual.norm() < 1e-10 * scale()))
    throw NumericalDegeneracy("DarcySolver: solve residual above 1e-10");

  Vector pressure = Vector::Zero(node_count());
  for (int node = 0; node < node_count(); ++node)
    if (node_dof_[node] >= 0) pressure[node] = x[node_dof_[node]];
  return pressure;
}

DarcyModel::DarcyModel(const DarcyConfig& config, std::uint64_t obs_seed)
    : config_(config),
      modes_total_(config.kl_modes * config.kl_modes),
      solver_(config.fem_cells, config.source) {
  if (config_.kl_modes < 1) throw InvalidInput("DarcyModel: kl_modes >= 1");
  if (2 * config_.kl_modes >= config_.fem_cells)
    throw InvalidInput(
        "DarcyModel: sample grid too coarse for the requested modes "
        "(needs 2 * kl_modes < fem_cells for an orthonormal basis)");
  if (config_.obs_count < 1 ||
      config_.obs_count > (config_.fem_cells - 1) * (config_.fem_cells - 1))
    throw InvalidInput("DarcyModel: invalid observation count");
  if (!(config_.noise_var >= 0.0))
    throw InvalidInput("DarcyModel: noise variance must be >= 0");

  const int n = config_.fem_cells;
  kl_basis_.resize(solver_.sample_count(), modes_total_);
  kl_lambda_.resize(modes_total_);
  int column = 0;
  for (int k = 1; k <= config_.kl_modes; ++k) {
    for (int l = 1; l <= config_.kl_modes; ++l, ++column) {
      kl_lambda_[column] = std::pow(
          M_PI * M_PI * static_cast<double>(k * k + l * l) +
              config_.tau * config_.tau,
          -config_.decay);
      for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
          kl_basis_(solver_.sample_index(ix, iy), column) =
              (2.0 / n) * std::cos(2.0 * M_PI * k * ix / n) *
              std::cos(2.0 * M_PI * l * iy / n);
    }
  }

  // Distinct interior vertices, drawn once per seed.
  Rng rng(obs_seed);
  const int per_axis = n - 1;
  const std::vector<int> picks = rng.sample_without_replacement(
      per_axis * per_axis, config_.obs_count);
  observed_nodes_.reserve(picks.size());
  for (int pick : picks) {
    const int ix = 1 + pick / per_axis;
    const int iy = 1 + pick % per_axis;
    observed_nodes_.push_back(solver_.node_index(ix, iy));
  }
}

Vector DarcyModel::field(const Vector& w) const {
  if (w.size() != modes_total_)
    throw InvalidInput("DarcyModel: whitened input dimension mismatch");
  return Vector::Constant(solver_.sample_count(), config_.field_mean) +
         kl_basis_ * w;
}

Vector DarcyModel::apply(const Vector& w) const {
  const Vector pressure = solver_.solve(field(w));
  Vector out(config_.obs_count);
  for (int i = 0; i < config_.obs_count; ++i)
    out[i] = pressure[observed_nodes_[i]];
  return out;
}

PriorSpectrum DarcyModel::prior() const {
  return PriorSpectrum{Matrix::Identity(modes_total_, modes_total_),
                       kl_lambda_};
}

DarcyData gen_darcy_data(const DarcyModel& model, std::uint64_t seed) {
  Rng rng(seed);
  DarcyData data;
  data.w_true = model.kl_lambda().cwiseSqrt().cwiseProduct(
      rng.gaussian_vector(model.input_dim()));
  data.y = model.apply(data.w_true) +
           std::sqrt(model.config().noise_var) *
               rng.gaussian_vector(model.output_dim());
  return data;
}

}  // namespace ekisel
