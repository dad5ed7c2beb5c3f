#include "ekisel/experiments/config.hpp"

#include <algorithm>

namespace ekisel {

std::string family_name(Family family) {
  switch (family) {
    case Family::Linear: return "linear";
    case Family::Algebraic: return "algebraic";
    case Family::Darcy: return "darcy";
  }
  throw InvalidInput("unknown family");
}

Family family_from_name(const std::string& name) {
  if (name == "linear") return Family::Linear;
  if (name == "algebraic") return Family::Algebraic;
  if (name == "darcy") return Family::Darcy;
  throw InvalidInput("unknown family name: " + name);
}

std::string variant_name(Variant variant) {
  switch (variant) {
    case Variant::Greedy: return "greedy";
    case Variant::Dominant: return "dom";
    case Variant::RandomSubsets: return "rand";
    case Variant::Standard: return "stand";
    case Variant::BruteForce: return "opt";
    case Variant::GreedyResampled: return "greedy_r";
    case Variant::DominantResampled: return "dom_r";
  }
  throw InvalidInput("unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "greedy") return Variant::Greedy;
  if (name == "dom") return Variant::Dominant;
  if (name == "rand") return Variant::RandomSubsets;
  if (name == "stand") return Variant::Standard;
  if (name == "opt") return Variant::BruteForce;
  if (name == "greedy_r") return Variant::GreedyResampled;
  if (name == "dom_r") return Variant::DominantResampled;
  throw InvalidInput("unknown variant name: " + name);
}

std::string fidelity_name(Fidelity fidelity) {
  return fidelity == Fidelity::Desk ? "desk" : "paper";
}

Fidelity fidelity_from_name(const std::string& name) {
  if (name == "desk") return Fidelity::Desk;
  if (name == "paper") return Fidelity::Paper;
  throw InvalidInput("unknown fidelity name: " + name);
}

std::vector<Variant> ExperimentConfig::effective_variants() const {
  const std::vector<Variant> allowed =
      family == Family::Linear
          ? std::vector<Variant>{Variant::Greedy, Variant::Dominant,
                                 Variant::RandomSubsets, Variant::Standard,
                                 Variant::BruteForce}
          : std::vector<Variant>{Variant::Greedy, Variant::Dominant,
                                 Variant::Standard, Variant::GreedyResampled,
                                 Variant::DominantResampled};
  if (variants.empty()) return allowed;
  std::vector<Variant> chosen;
  for (Variant v : variants)
    if (std::find(allowed.begin(), allowed.end(), v) != allowed.end())
      chosen.push_back(v);
  if (chosen.empty())
    throw InvalidInput("no requested variant applies to this family");
  return chosen;
}

void ExperimentConfig::validate() const {
  if (ensemble_sizes.empty())
    throw InvalidInput("config: ensemble_sizes must be non-empty");
  for (int j : ensemble_sizes)
    if (j < 2) throw InvalidInput("config: ensemble sizes must be >= 2");
  if (betas.empty()) throw InvalidInput("config: betas must be non-empty");
  for (double b : betas)
    if (!(b > 0.0)) throw InvalidInput("config: betas must be positive");
  if (experiment_count < 1)
    throw InvalidInput("config: experiment_count must be >= 1");
  if (family == Family::Linear) {
    if (random_subsets < 1)
      throw InvalidInput("config: linear runs need random_subsets >= 1");
  } else {
    if (!(horizon > 0.0))
      throw InvalidInput("config: nonlinear runs need a positive horizon");
    for (double t : resample_times)
      if (!(t > 0.0 && t < horizon))
        throw InvalidInput("config: resample times must lie inside (0, horizon)");
  }
  if (!(ode_rel_tol > 0.0))
    throw InvalidInput("config: ode_rel_tol must be positive");
  if (parallelism < 0)
    throw InvalidInput("config: parallelism must be >= 0");
}

ExperimentConfig default_config(Family family, Fidelity fidelity) {
  ExperimentConfig config;
  config.family = family;
  config.fidelity = fidelity;
  config.brute_force_cap =
      (fidelity == Fidelity::Paper) ? 2'000'000 : 10'000;

  switch (family) {
    case Family::Linear:
      config.ensemble_sizes = {2, 4, 6, 8, 10};
      config.betas = {1e-3};
      config.experiment_count = 250;
      config.random_subsets = 200;
      break;
    case Family::Algebraic:
      config.ensemble_sizes = {5};
      config.betas = {1e-3};
      config.experiment_count = 25;
      config.horizon = 100.0;
      config.resample_times = {100.0 / 3.0, 200.0 / 3.0};
      break;
    case Family::Darcy:
      config.ensemble_sizes = {5};
      config.betas = {1e-5};
      config.experiment_count = 10;
      config.horizon = 1.0;
      config.resample_times = {1.0 / 3.0, 2.0 / 3.0};
      config.darcy.fem_cells = (fidelity == Fidelity::Paper) ? 64 : 32;
      break;
  }
  return config;
}

std::uint64_t experiment_seed(const ExperimentConfig& config, int index,
                              int purpose) {
  const auto family_id = static_cast<std::uint64_t>(config.family) + 1;
  return derive_seed(config.seed, {family_id, static_cast<std::uint64_t>(index),
                                   static_cast<std::uint64_t>(purpose)});
}

}  // namespace ekisel
