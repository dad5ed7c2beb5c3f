#include "ekisel/experiments/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ekisel {

namespace {

using nlohmann::json;

json num_or_null(double x) {
  return std::isfinite(x) ? json(x) : json(nullptr);
}

double num_or_nan(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null())
    return std::numeric_limits<double>::quiet_NaN();
  return j[key].get<double>();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& err) {
    throw ConfigFileError("config is not valid JSON (" + path + "): " +
                          err.what());
  }

  try {
    if (!j.contains("family"))
      throw ConfigFileError("config misses required key \"family\": " + path);
    const Family family = family_from_name(j["family"].get<std::string>());
    const Fidelity fidelity =
        j.contains("fidelity")
            ? fidelity_from_name(j["fidelity"].get<std::string>())
            : Fidelity::Desk;
    ExperimentConfig config = default_config(family, fidelity);

    if (j.contains("ensemble_sizes"))
      config.ensemble_sizes = j["ensemble_sizes"].get<std::vector<int>>();
    if (j.contains("betas"))
      config.betas = j["betas"].get<std::vector<double>>();
    if (j.contains("variants")) {
      config.variants.clear();
      for (const auto& name : j["variants"])
        config.variants.push_back(variant_from_name(name.get<std::string>()));
    }
    if (j.contains("experiment_count"))
      config.experiment_count = j["experiment_count"].get<int>();
    if (j.contains("random_subsets"))
      config.random_subsets = j["random_subsets"].get<int>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("horizon")) config.horizon = j["horizon"].get<double>();
    if (j.contains("resample_times"))
      config.resample_times = j["resample_times"].get<std::vector<double>>();
    if (j.contains("ode_rel_tol"))
      config.ode_rel_tol = j["ode_rel_tol"].get<double>();
    if (j.contains("brute_force_cap"))
      config.brute_force_cap = j["brute_force_cap"].get<std::uint64_t>();
    if (j.contains("parallelism"))
      config.parallelism = j["parallelism"].get<int>();
    if (j.contains("out_dir")) config.out_dir = j["out_dir"].get<std::string>();

    if (j.contains("linear")) {
      const json& lin = j["linear"];
      if (lin.contains("m")) config.linear.m = lin["m"].get<int>();
      if (lin.contains("n")) config.linear.n = lin["n"].get<int>();
      if (lin.contains("noise")) config.linear.noise = lin["noise"].get<double>();
      if (lin.contains("decay_power"))
        config.linear.decay_power = lin["decay_power"].get<double>();
    }
    if (j.contains("darcy")) {
      const json& da = j["darcy"];
      if (da.contains("fem_cells"))
        config.darcy.fem_cells = da["fem_cells"].get<int>();
      if (da.contains("kl_modes"))
        config.darcy.kl_modes = da["kl_modes"].get<int>();
      if (da.contains("obs_count"))
        config.darcy.obs_count = da["obs_count"].get<int>();
      if (da.contains("tau")) config.darcy.tau = da["tau"].get<double>();
      if (da.contains("decay")) config.darcy.decay = da["decay"].get<double>();
      if (da.contains("source")) config.darcy.source = da["source"].get<double>();
      if (da.contains("noise_var"))
        config.darcy.noise_var = da["noise_var"].get<double>();
      if (da.contains("field_mean"))
        config.darcy.field_mean = da["field_mean"].get<double>();
    }

    config.validate();
    return config;
  } catch (const ConfigFileError&) {
    throw;
  } catch (const std::exception& err) {
    throw ConfigFileError("invalid config (" + path + "): " + err.what());
  }
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  json j;
  j["family"] = family_name(config.family);
  j["fidelity"] = fidelity_name(config.fidelity);
  j["ensemble_sizes"] = config.ensemble_sizes;
  j["betas"] = config.betas;
  json variants = json::array();
  for (Variant v : config.effective_variants()) variants.push_back(variant_name(v));
  j["variants"] = variants;
  j["experiment_count"] = config.experiment_count;
  j["random_subsets"] = config.random_subsets;
  j["seed"] = config.seed;
  j["horizon"] = config.horizon;
  j["resample_times"] = config.resample_times;
  j["ode_rel_tol"] = config.ode_rel_tol;
  j["brute_force_cap"] = config.brute_force_cap;
  j["parallelism"] = config.parallelism;
  j["out_dir"] = config.out_dir;
  j["linear"] = {{"m", config.linear.m},
                 {"n", config.linear.n},
                 {"noise", config.linear.noise},
                 {"decay_power", config.linear.decay_power}};
  j["darcy"] = {{"fem_cells", config.darcy.fem_cells},
                {"kl_modes", config.darcy.kl_modes},
                {"obs_count", config.darcy.obs_count},
                {"tau", config.darcy.tau},
                {"decay", config.darcy.decay},
                {"source", config.darcy.source},
                {"noise_var", config.darcy.noise_var},
                {"field_mean", config.darcy.field_mean}};

  std::ofstream out(path);
  if (!out) throw ConfigFileError("cannot write config file: " + path);
  out << j.dump(2) << '\n';
}

void write_outcomes_jsonl(const std::vector<VariantOutcome>& outcomes,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write outcomes file: " + path);
  for (const VariantOutcome& o : outcomes) {
    json j;
    j["family"] = family_name(o.family);
    j["variant"] = variant_name(o.variant);
    j["ensemble_size"] = o.ensemble_size;
    j["beta"] = o.beta;
    j["experiment_index"] = o.experiment_index;
    j["problem_seed"] = o.problem_seed;
    j["r"] = num_or_null(o.r);
    j["reference"] = num_or_null(o.reference);
    j["ratio"] = num_or_null(o.ratio);
    j["percentile"] = num_or_null(o.percentile);
    j["jacobian_evals"] = o.jacobian_evals;
    j["used_standard_fallback"] = o.used_standard_fallback;
    j["ok"] = o.ok;
    j["error"] = o.error;
    out << j.dump() << '\n';
  }
}

std::vector<VariantOutcome> read_outcomes_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open outcomes file: " + path);
  std::vector<VariantOutcome> outcomes;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    VariantOutcome o;
    o.family = family_from_name(j["family"].get<std::string>());
    o.variant = variant_from_name(j["variant"].get<std::string>());
    o.ensemble_size = j["ensemble_size"].get<int>();
    o.beta = j["beta"].get<double>();
    o.experiment_index = j["experiment_index"].get<int>();
    o.problem_seed = j["problem_seed"].get<std::uint64_t>();
    o.r = num_or_nan(j, "r");
    o.reference = num_or_nan(j, "reference");
    o.ratio = num_or_nan(j, "ratio");
    o.percentile = num_or_nan(j, "percentile");
    o.jacobian_evals = j["jacobian_evals"].get<int>();
    o.used_standard_fallback = j["used_standard_fallback"].get<bool>();
    o.ok = j["ok"].get<bool>();
    o.error = j["error"].get<std::string>();
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

void write_aggregates_csv(const std::vector<AggregateRow>& rows,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write aggregates file: " + path);
  out << "family,variant,ensemble_size,beta,mean_ratio,mean_percentile,n_ok,"
         "n_fail\n";
  char buf[64];
  const auto cell = [&](double x) -> std::string {
    if (!std::isfinite(x)) return "";
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
  };
  for (const AggregateRow& row : rows) {
    out << family_name(row.family) << ',' << variant_name(row.variant) << ','
        << row.ensemble_size << ',' << cell(row.beta) << ','
        << cell(row.mean_ratio) << ',' << cell(row.mean_percentile) << ','
        << row.n_ok << ',' << row.n_fail << '\n';
  }
}

std::string format_aggregate_table(const std::vector<AggregateRow>& rows) {
  if (rows.empty()) return "(no results)\n";

  std::set<double> betas;
  std::set<int> sizes;
  for (const AggregateRow& row : rows) {
    betas.insert(row.beta);
    sizes.insert(row.ensemble_size);
  }
  // Variants in canonical enum order.
  std::vector<Variant> variants;
  for (Variant v :
       {Variant::Greedy, Variant::Dominant, Variant::RandomSubsets,
        Variant::Standard, Variant::BruteForce, Variant::GreedyResampled,
        Variant::DominantResampled}) {
    if (std::any_of(rows.begin(), rows.end(),
                    [&](const AggregateRow& row) { return row.variant == v; }))
      variants.push_back(v);
  }

  const auto find = [&](Variant v, int j, double beta) -> const AggregateRow* {
    for (const AggregateRow& row : rows)
      if (row.variant == v && row.ensemble_size == j && row.beta == beta)
        return &row;
    return nullptr;
  };

  std::ostringstream out;
  char buf[96];
  const bool any_pct = std::any_of(rows.begin(), rows.end(),
                                   [](const AggregateRow& row) {
                                     return std::isfinite(row.mean_percentile);
                                   });
  for (double beta : betas) {
    std::snprintf(buf, sizeof(buf), "beta = %g  (mean ratio r_min / r%s)\n",
                  beta, any_pct ? "; [percentile vs random]" : "");
    out << buf;
    out << "  variant     ";
    for (int j : sizes) {
      std::snprintf(buf, sizeof(buf), " %14s=%-3d", "J", j);
      out << buf;
    }
    out << '\n';
    for (Variant v : variants) {
      std::snprintf(buf, sizeof(buf), "  %-12s", variant_name(v).c_str());
      out << buf;
      for (int j : sizes) {
        const AggregateRow* row = find(v, j, beta);
        if (!row || !std::isfinite(row->mean_ratio)) {
          std::snprintf(buf, sizeof(buf), " %18s", "-");
        } else if (std::isfinite(row->mean_percentile)) {
          std::snprintf(buf, sizeof(buf), "   %8.4f [%5.1f]",
                        row->mean_ratio, row->mean_percentile);
        } else {
          std::snprintf(buf, sizeof(buf), "   %8.4f        ",
                        row->mean_ratio);
        }
        out << buf;
      }
      out << '\n';
    }
    int fails = 0;
    for (const AggregateRow& row : rows)
      if (row.beta == beta) fails += row.n_fail;
    if (fails > 0) out << "  (" << fails << " failed run(s) excluded)\n";
    out << '\n';
  }
  return out.str();
}

}  // namespace ekisel
