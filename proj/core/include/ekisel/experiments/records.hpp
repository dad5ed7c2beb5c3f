#pragma once

#include "ekisel/experiments/config.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ekisel {

// One variant evaluated on one drawn problem.
struct VariantOutcome {
  Family family = Family::Linear;
  Variant variant = Variant::Greedy;
  int ensemble_size = 0;
  double beta = 0.0;
  int experiment_index = 0;
  std::uint64_t problem_seed = 0;

  double r = std::numeric_limits<double>::quiet_NaN();          // attained value
  double reference = std::numeric_limits<double>::quiet_NaN();  // r_min
  double ratio = std::numeric_limits<double>::quiet_NaN();      // r_min / r
  // Share (in %) of comparison subsets whose value is at least r; NaN when
  // no comparison set was run (nonlinear families).
  double percentile = std::numeric_limits<double>::quiet_NaN();

  int jacobian_evals = 0;
  bool used_standard_fallback = false;
  bool ok = false;
  std::string error;
};

// Mean-of-ratios aggregation of one (variant, J, beta) cell; failed records
// are excluded from the means and counted separately.
struct AggregateRow {
  Family family = Family::Linear;
  Variant variant = Variant::Greedy;
  int ensemble_size = 0;
  double beta = 0.0;
  double mean_ratio = std::numeric_limits<double>::quiet_NaN();
  double mean_percentile = std::numeric_limits<double>::quiet_NaN();
  int n_ok = 0;
  int n_fail = 0;
};

std::vector<AggregateRow> aggregate(const std::vector<VariantOutcome>& outcomes);

}  // namespace ekisel
