#pragma once

// Selection of the initial-ensemble subspace for linear(ised) regularised
// least squares, and construction of the mixing matrix that places the
// long-run ensemble mean at the subspace-restricted minimiser.
//
// Problem data: operator A (m x n), data y, shift mu, prior eigenpairs
// (V, lambda) with the regularisation weight already folded into lambda.
// The ensemble is initialised as u^(i) = mean_shift + V_J B e_i for an index
// set J of size |J| = ensemble size and an invertible mixing matrix B.
//
// With A_J = A V_J, M_J = (Lambda_J^-1 + A_J^T A_J)^-1 and
// z = y - A V_J V_J^T mu, the long-run (t -> infinity) value of
//
//   |A u_bar - y|^2 + |u_bar - mu|^2_R
//
// equals
//
//   z^T z - z^T A_J M_J A_J^T z + mu^T R^+_{J^c} mu                (floor)
//   + (1 - 1^T B^-1 zt)^2 / (1^T B^-1 M_J B^-T 1),
//
// where zt = M_J V_J^T (A^T y + R_J^+ mu) are the coordinates of the
// restricted minimiser.  The floor is attained exactly when
// 1^T B^-1 zt = 1; choosing B 1 = J zt additionally puts the mean itself at
// the minimiser V_J zt.
//
// Greedy selection minimises the floor one index at a time.  With scaled
// columns p_j = sqrt(lambda_j) A v_j and P the matrix of selected columns,
// A_J M_J A_J^T = P Mt P^T for Mt = (I + P^T P)^-1, and appending a column
// updates Mt by a Schur-complement block formula with pivot
// Delta = 1 + p^T p - p^T P Mt P^T p >= 1, so each candidate is scored in
// O(m k) flops and no matrix is refactored from scratch.

#include "ekisel/random.hpp"
#include "ekisel/types.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace ekisel {

struct LinearProblemSpec {
  Matrix a;       // m x n forward operator
  Vector y;       // data (m)
  Vector mu;      // shift / prior mean (n)
  Matrix v;       // n x n orthonormal prior eigenvectors
  Vector lambda;  // n positive effective eigenvalues

  LinearProblemSpec(Matrix a_in, Vector y_in, Vector mu_in, Matrix v_in,
                    Vector lambda_in);

  int state_dim() const { return static_cast<int>(a.cols()); }
  int data_dim() const { return static_cast<int>(a.rows()); }
};

// An index set together with the mixing matrix B (J x J, reciprocal
// condition number at least 1e-12).
struct SubspaceChoice {
  std::vector<int> indices;
  Matrix mixing;

  SubspaceChoice(std::vector<int> indices_in, Matrix mixing_in);
};

// Quantities entering the long-run value for a fixed index set.
struct LongRunTerms {
  std::vector<int> indices;
  Matrix a_sub;       // A V_J (m x |J|)
  Matrix m_sub;       // (Lambda_J^-1 + A_J^T A_J)^-1, SPD
  Vector z;           // y - A V_J V_J^T mu
  Vector target;      // zt = M_J V_J^T (A^T y + R_J^+ mu)
  double prior_tail;  // mu^T R^+_{J^c} mu
  double floor;       // attainable minimum of the long-run value
};

LongRunTerms long_run_terms(const std::vector<int>& indices,
                            const LinearProblemSpec& prob);

// Floor only (no mixing matrix involved).
double lower_bound(const std::vector<int>& indices,
                   const LinearProblemSpec& prob);

// Long-run value of the theorem for a concrete (indices, B) choice.
double long_run_objective(const SubspaceChoice& choice,
                          const LinearProblemSpec& prob);

// Whether B attains the floor: |1^T B^-1 zt - 1| <= tol.
bool is_optimal_mixing(const SubspaceChoice& choice,
                       const LinearProblemSpec& prob, double tol = 1e-8);

// B = diag(sqrt(lambda_J)): the classical spectrum-scaled initialisation.
Matrix standard_mixing(const std::vector<int>& indices,
                       const LinearProblemSpec& prob);

// B = sqrt(J) |zt| U with U orthogonal and U 1/sqrt(J) = zt/|zt|; satisfies
// B 1 = J zt and trace(B^T B) = J^2 |zt|^2 (the minimal state-space spread
// among orthogonally-mixed optimal choices).  Throws NumericalDegeneracy
// when zt vanishes.
Matrix optimal_mixing_state(const std::vector<int>& indices,
                            const LinearProblemSpec& prob);

// B = sqrt(J) |M^-1/2 zt| M^1/2 U with U 1/sqrt(J) = M^-1/2 zt/|M^-1/2 zt|;
// also satisfies B 1 = J zt but minimises the projected spread
// trace(B^T M^-1 B) = J^2 |M^-1/2 zt|^2.
Matrix optimal_mixing_projection(const std::vector<int>& indices,
                                 const LinearProblemSpec& prob);

// --- greedy selection ---

class GreedyWorkspace {
 public:
  explicit GreedyWorkspace(const LinearProblemSpec& prob);

  // Lower bound of the currently selected set.
  double current_lower_bound() const;

  // Score of candidate j: current_lower_bound after inserting j equals
  // |z|^2 + prior_tail + score(j) (so smaller is better, and differences of
  // scores equal differences of lower bounds).
  double score(int j) const;

  int selected_count() const { return static_cast<int>(selected_.size()); }
  const std::vector<int>& selected() const { return selected_; }
  bool is_selected(int j) const { return selected_mask_[j]; }
  int state_dim() const;

  friend GreedyWorkspace rank_one_update(const GreedyWorkspace& ws, int j);

 private:
  struct Precompute {
    Matrix av;        // columns A v_j (m x n)
    Vector av_norm2;  // |A v_j|^2
    Vector mu_coef;   // v_j^T mu
    Vector lambda;
    Vector y;
  };

  std::shared_ptr<const Precompute> pre_;
  std::vector<int> selected_;
  std::vector<char> selected_mask_;
  Matrix p_sel_;       // m x k selected scaled columns sqrt(lambda_j) A v_j
  Matrix m_tilde_;     // (I + P^T P)^-1
  Vector z_;           // y - A V_sel V_sel^T mu
  double prior_tail_;  // sum over unselected of (v_j^T mu)^2 / lambda_j
};

// Returns the workspace with index j inserted (Schur-complement update of
// Mt).  Throws InvalidInput if j is out of range or already selected and
// NumericalDegeneracy if the pivot collapses.
GreedyWorkspace rank_one_update(const GreedyWorkspace& ws, int j);

struct SelectionResult {
  std::vector<int> indices;        // in selection order
  Matrix m_sub;                    // dense recomputation of M_J
  std::vector<double> bound_path;  // lower bound after each insertion
};

// Greedy minimisation of the lower bound, one index per step, ties broken
// towards the smallest index.  Selects exactly `count` indices (the first
// one is scored with an empty selection, not seeded separately).
SelectionResult greedy_select(const LinearProblemSpec& prob, int count);

// Indices of the `count` largest eigenvalues (descending, ties towards the
// smaller index).
std::vector<int> dominant_select(const LinearProblemSpec& prob, int count);

// Uniformly random index set of the given size (sorted ascending).
std::vector<int> random_select(const LinearProblemSpec& prob, int count,
                               Rng& rng);

// Exhaustive minimisation of the lower bound over all index sets.  Refuses
// (InvalidInput) when C(n, count) exceeds `cap`.  Ties resolve to the
// lexicographically smallest set.
std::vector<int> brute_force_select(const LinearProblemSpec& prob, int count,
                                    std::uint64_t cap = 2'000'000);

}  // namespace ekisel
