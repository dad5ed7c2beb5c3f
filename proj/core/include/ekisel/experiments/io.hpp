#pragma once

#include "ekisel/experiments/records.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace ekisel {

// Raised when a config file is missing or malformed (the CLI maps this to
// its "bad invocation" exit code, distinct from runtime failures).
struct ConfigFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// JSON config.  The file must name a "family"; every other key overlays the
// family defaults at the requested fidelity ("desk" unless given).
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

// One outcome per line as a JSON object; non-finite numbers are stored as
// null and read back as NaN.
void write_outcomes_jsonl(const std::vector<VariantOutcome>& outcomes,
                          const std::string& path);
std::vector<VariantOutcome> read_outcomes_jsonl(const std::string& path);

void write_aggregates_csv(const std::vector<AggregateRow>& rows,
                          const std::string& path);

// Human-readable summary: one block per beta, variants as rows and ensemble
// sizes as columns (mean ratio, plus mean percentile when available).
std::string format_aggregate_table(const std::vector<AggregateRow>& rows);

}  // namespace ekisel
