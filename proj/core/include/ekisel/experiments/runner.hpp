#pragma once

#include "ekisel/experiments/records.hpp"

#include <functional>
#include <vector>

namespace ekisel {

// Runs task(0..count-1) on a pool of `threads` std::threads (0 selects
// hardware concurrency).  Tasks are claimed from a shared counter; the
// first exception thrown by any task is rethrown after all workers join.
void parallel_for(int count, int threads, const std::function<void(int)>& task);

struct FamilyRunResult {
  std::vector<VariantOutcome> outcomes;   // deterministic order
  std::vector<AggregateRow> aggregates;
};

// Every (ensemble size, beta) cell times `experiment_count` problem draws,
// parallel over draws.  Outcome order is independent of the thread count.
FamilyRunResult run_family(const ExperimentConfig& config);

}  // namespace ekisel
