#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace ekisel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when inputs violate a documented precondition (dimension mismatch,
// non-finite entries, empty index sets, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an otherwise well-posed computation degenerates numerically
// (singular pivot, vanishing target vector, ill-conditioned mixing matrix).
class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when adaptive time stepping cannot make progress.  Carries the time
// that was reached before the failure so callers can report partial results.
class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, double time_reached)
      : std::runtime_error(what), time_reached_(time_reached) {}
  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

}  // namespace ekisel
