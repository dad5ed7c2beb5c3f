#pragma once

// Log-permeability inversion for steady 2-D Darcy flow.
//
//   -div( exp(u) grad p ) = f   on (0,1)^2,      p = 0 on the boundary.
//
// The log-coefficient u is parameterised by a truncated cosine
// Karhunen-Loeve expansion: on the uniform sample grid
// x = (i/N, j/N), i,j = 0..N-1, the basis column for mode (k, l) has
// entries (2/N) cos(2 pi k x1) cos(2 pi l x2) with eigenvalue
// lambda_{k,l} = (pi^2 (k^2 + l^2) + tau^2)^(-decay), columns ordered
// lexicographically in (k, l), k,l = 1..modes.  On that grid the columns
// are exactly orthonormal as long as 2*modes < N.  The whitened input w
// defines the field u = field_mean + E w.
//
// The PDE is discretised with P1 finite elements on the uniform
// triangulation obtained by splitting each of the N^2 grid squares along
// the same diagonal; the basis functions are 1-periodic, so the field
// value at nodes on the far edges (i = N or j = N) is the periodic
// extension of the sample grid.  exp(u) is taken elementwise constant as
// the mean of its three vertex values.  The sparse SPD system is solved by
// a cached-symbolic Cholesky factorisation with iterative refinement, and
// each solve verifies a residual below 1e-10 in the normwise backward
// sense |b - Ax| < 1e-10 (|A| |x| + |b|), the strongest bound a direct
// solve can guarantee for arbitrarily high coefficient contrast.
//
// Observations are the pressures at `obs_count` distinct interior mesh
// vertices drawn uniformly from a seed fixed at construction.

#include "ekisel/eki.hpp"
#include "ekisel/forward_model.hpp"
#include "ekisel/random.hpp"
#include "ekisel/types.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace ekisel {

struct DarcyConfig {
  int fem_cells = 32;     // N: cells per axis (paper-scale runs use 64)
  int kl_modes = 7;       // modes per axis; input dimension is kl_modes^2
  int obs_count = 30;     // observed interior vertices
  double tau = 0.01;      // spectral shift
  double decay = 1.0;     // spectral decay exponent
  double source = 1.0;    // constant right-hand side f
  double noise_var = 10.0;
  double field_mean = -9.0;
};

// Mesh, assembly and cached sparse Cholesky for one resolution.  A solver
// instance is not thread-safe (the factorisation workspace is reused);
// concurrent experiments must use separate instances.
class DarcySolver {
 public:
  DarcySolver(int cells, double source);

  int cells() const { return cells_; }
  int sample_count() const { return cells_ * cells_; }
  int node_count() const { return (cells_ + 1) * (cells_ + 1); }

  // x-major indexing on both grids.
  int sample_index(int ix, int iy) const { return ix * cells_ + iy; }
  int node_index(int ix, int iy) const { return ix * (cells_ + 1) + iy; }
  std::pair<double, double> node_coords(int node) const;
  bool node_is_interior(int node) const;

  // log_coeff holds u on the sample grid; returns nodal pressures with
  // zeros on the boundary.
  Vector solve(const Vector& log_coeff) const;

 private:
  struct Element {
    std::array<int, 3> dof;     // interior dof ids, -1 on the boundary
    std::array<int, 3> sample;  // sample-grid ids of the vertices
    std::array<int, 9> slot;    // value-array positions, -1 if dropped
  };

  int cells_;
  double source_;
  int dof_count_;
  std::vector<int> node_dof_;       // node id -> interior dof id or -1
  std::vector<Element> elements_;
  Vector load_;                     // constant source load on interior dofs
  mutable Eigen::SparseMatrix<double> stiffness_;
  mutable Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
  mutable Vector exp_field_;        // scratch: exp(u) on the sample grid
};

class DarcyModel final : public ForwardModel {
 public:
  DarcyModel(const DarcyConfig& config, std::uint64_t obs_seed);

  int input_dim() const override { return modes_total_; }
  int output_dim() const override { return config_.obs_count; }

  Vector apply(const Vector& w) const override;
  // Jacobian via the inherited central differences with step
  // 1e-5 * max(1, |w_j|).

  const DarcyConfig& config() const { return config_; }
  const DarcySolver& solver() const { return solver_; }
  const Matrix& kl_basis() const { return kl_basis_; }
  const Vector& kl_lambda() const { return kl_lambda_; }
  const std::vector<int>& observed_nodes() const { return observed_nodes_; }

  // Whitened prior: identity eigenvectors, KL eigenvalues.
  PriorSpectrum prior() const;

  // Full field on the sample grid for a whitened input.
  Vector field(const Vector& w) const;

 private:
  DarcyConfig config_;
  int modes_total_;
  DarcySolver solver_;
  Matrix kl_basis_;   // sample_count x modes_total
  Vector kl_lambda_;  // modes_total
  std::vector<int> observed_nodes_;
};

// Synthetic data: w_true ~ N(0, diag(lambda)), y = G(w_true) + noise.
struct DarcyData {
  Vector w_true;
  Vector y;
};
DarcyData gen_darcy_data(const DarcyModel& model, std::uint64_t seed);

}  // namespace ekisel
