#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "inference.hpp"
#include "models.hpp"
#include "resample.hpp"
#include "ustat.hpp"

namespace rdpgboot {

enum class ExperimentKind { TriangleDensity, ShortestPath, UstatClt, WassersteinDecay };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::TriangleDensity: return "triangle-density";
    case ExperimentKind::ShortestPath: return "shortest-path";
    case ExperimentKind::UstatClt: return "ustat-clt";
    case ExperimentKind::WassersteinDecay: return "wasserstein-decay";
  }
  return "?";
}

/// Settings of one experiment run. Fields a given experiment does not use are
/// carried along unchanged so that configs round-trip.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::TriangleDensity;
  std::vector<std::size_t> n_values;
  std::size_t trials = 200;
  std::size_t B = 100;
  std::size_t M = 2000;        // Monte Carlo tuples per vertex when C(n, m) exceeds exact_budget
  double exact_budget = kDefaultTupleBudget;
  std::size_t d = 1;
  std::uint64_t seed = 0;
  double level = 0.95;
  double alpha = 2.0;          // Beta latent distribution
  double beta = 3.0;
  std::vector<std::vector<double>> sbm_block{{0.4, 0.5}, {0.5, 0.7}};
  std::vector<double> sbm_pi{0.5, 0.5};
  double nu = 5.0;             // SBM probabilities are (nu / sqrt(n)) sbm_block
  std::vector<double> nu_values;
  std::size_t nu_draws = 100;
  std::size_t truth_draws = 10000;
  std::size_t max_attempts = 1000;
  std::size_t samples = 30;    // graphs per side for the Wasserstein estimate
  std::size_t match_restarts = 1;
  std::string scheme = "additive";
  std::vector<std::string> methods;
  std::string output_dir;

  bool operator==(const ExperimentConfig&) const = default;

  SbmParams sbm_at(std::size_t n, double scale) const {
    const auto k = static_cast<Eigen::Index>(sbm_pi.size());
    SbmParams p{Eigen::MatrixXd(k, k), sbm_pi};
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        p.block(i, j) = sbm_block[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * scale /
                        std::sqrt(static_cast<double>(n));
    return p;
  }
  SbmParams sbm_at(std::size_t n) const { return sbm_at(n, nu); }
};

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (ExperimentKind k : {ExperimentKind::TriangleDensity, ExperimentKind::ShortestPath, ExperimentKind::UstatClt,
                           ExperimentKind::WassersteinDecay})
    if (s == to_string(k)) return k;
  throw ConfigError("experiment", "unknown experiment '" + s + "'");
}

/// Desk-scale defaults for each experiment.
inline ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  switch (kind) {
    case ExperimentKind::TriangleDensity:
      c.n_values = {100, 200, 500};
      c.methods = {"percentile", "std-boot-mean", "std-observed"};
      break;
    case ExperimentKind::ShortestPath:
      c.n_values = {50, 100, 200};
      c.d = 2;
      c.methods = {"rdpg", "graphon", "sbm"};
      c.nu_values = {2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0};
      break;
    case ExperimentKind::UstatClt:
      c.n_values = {1000};
      c.trials = 10;
      c.B = 2000;
      c.methods = {"additive"};
      break;
    case ExperimentKind::WassersteinDecay:
      c.n_values = {30, 60, 120};
      c.trials = 10;
      c.methods = {"rdpg"};
      break;
  }
  return c;
}

inline void validate(const ExperimentConfig& c) {
  auto positive = [](std::size_t v, const char* path) {
    if (v == 0) throw ConfigError(path, "must be positive");
  };
  if (c.n_values.empty()) throw ConfigError("n_values", "must be non-empty");
  for (std::size_t i = 0; i < c.n_values.size(); ++i)
    if (c.n_values[i] < 3) throw ConfigError("n_values[" + std::to_string(i) + "]", "must be at least 3");
  positive(c.trials, "trials");
  positive(c.B, "B");
  positive(c.M, "M");
  positive(c.d, "d");
  positive(c.max_attempts, "max_attempts");
  positive(c.samples, "samples");
  positive(c.match_restarts, "match_restarts");
  if (!(c.exact_budget > 0.0)) throw ConfigError("exact_budget", "must be positive");
  if (!(c.level > 0.0 && c.level < 1.0)) throw ConfigError("level", "must lie in (0, 1)");
  if (!(c.alpha > 0.0)) throw ConfigError("alpha", "must be positive");
  if (!(c.beta > 0.0)) throw ConfigError("beta", "must be positive");
  if (c.methods.empty()) throw ConfigError("methods", "must be non-empty");
  if (c.B < 2) throw ConfigError("B", "must be at least 2");

  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    const std::string path = "methods[" + std::to_string(i) + "]";
    try {
      switch (c.experiment) {
        case ExperimentKind::TriangleDensity:
          if (ci_method_from_string(c.methods[i]) == CiMethod::Percentile && c.B < 20)
            throw ConfigError("B", "percentile intervals need at least 20 replicates");
          break;
        case ExperimentKind::ShortestPath:
        case ExperimentKind::WassersteinDecay:
          resampler_kind_from_string(c.methods[i]);
          break;
        case ExperimentKind::UstatClt:
          if (c.methods[i] != "additive" && c.methods[i] != "efron") throw InvalidArgument("unknown scheme");
          break;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(path, e.what());
    }
  }
  if (c.scheme != "additive" && c.scheme != "efron") throw ConfigError("scheme", "must be 'additive' or 'efron'");

  if (c.experiment == ExperimentKind::ShortestPath) {
    const std::size_t k = c.sbm_pi.size();
    if (k == 0) throw ConfigError("sbm_pi", "must be non-empty");
    if (c.sbm_block.size() != k) throw ConfigError("sbm_block", "must be K x K with K = |sbm_pi|");
    for (std::size_t i = 0; i < k; ++i)
      if (c.sbm_block[i].size() != k) throw ConfigError("sbm_block[" + std::to_string(i) + "]", "must have K entries");
    if (!(c.nu > 0.0)) throw ConfigError("nu", "must be positive");
    for (std::size_t i = 0; i < c.nu_values.size(); ++i)
      if (!(c.nu_values[i] > 0.0)) throw ConfigError("nu_values[" + std::to_string(i) + "]", "must be positive");
    positive(c.nu_draws, "nu_draws");
    if (c.truth_draws < 100) throw ConfigError("truth_draws", "must be at least 100");
    for (std::size_t n : c.n_values) {
      try {
        c.sbm_at(n).validate();
        for (double v : c.nu_values) c.sbm_at(n, v).validate();
      } catch (const Error& e) {
        throw ConfigError("sbm_block", std::string(e.what()) + " at n = " + std::to_string(n));
      }
    }
  }
  if (c.experiment == ExperimentKind::WassersteinDecay) {
    for (std::size_t i = 0; i < c.n_values.size(); ++i)
      if (c.n_values[i] > 200) throw ConfigError("n_values[" + std::to_string(i) + "]", "must be at most 200");
    if (c.samples > 50) throw ConfigError("samples", "must be at most 50");
  }
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return nlohmann::json{{"experiment", to_string(c.experiment)},
                        {"n_values", c.n_values},
                        {"trials", c.trials},
                        {"B", c.B},
                        {"M", c.M},
                        {"exact_budget", c.exact_budget},
                        {"d", c.d},
                        {"seed", c.seed},
                        {"level", c.level},
                        {"alpha", c.alpha},
                        {"beta", c.beta},
                        {"sbm_block", c.sbm_block},
                        {"sbm_pi", c.sbm_pi},
                        {"nu", c.nu},
                        {"nu_values", c.nu_values},
                        {"nu_draws", c.nu_draws},
                        {"truth_draws", c.truth_draws},
                        {"max_attempts", c.max_attempts},
                        {"samples", c.samples},
                        {"match_restarts", c.match_restarts},
                        {"scheme", c.scheme},
                        {"methods", c.methods},
                        {"output_dir", c.output_dir}};
}

inline std::string serialize(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Reads a config object. Missing keys take the defaults of the named
/// experiment; unknown keys and type mismatches are errors naming the field.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  ExperimentKind kind = ExperimentKind::TriangleDensity;
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) throw ConfigError("experiment", "must be a string");
    kind = experiment_kind_from_string(j["experiment"].get<std::string>());
  }
  ExperimentConfig c = default_config(kind);

  auto read = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(key, std::string("wrong type (") + e.what() + ")");
    }
  };
  static const std::set<std::string> known{"experiment", "n_values", "trials", "B", "M", "exact_budget", "d",
                                           "seed", "level", "alpha", "beta", "sbm_block", "sbm_pi", "nu",
                                           "nu_values", "nu_draws", "truth_draws", "max_attempts", "samples",
                                           "match_restarts", "scheme", "methods", "output_dir"};
  for (const auto& item : j.items())
    if (!known.count(item.key())) throw ConfigError(item.key(), "unknown key");
  // Negative numbers would wrap silently through get_to on unsigned fields.
  for (const char* key : {"n_values", "trials", "B", "M", "d", "seed", "nu_draws", "truth_draws", "max_attempts",
                          "samples", "match_restarts"}) {
    if (!j.contains(key)) continue;
    const auto& v = j[key];
    auto check = [&](const nlohmann::json& x, const std::string& path) {
      if (!x.is_number_unsigned()) throw ConfigError(path, "must be a non-negative integer");
    };
    if (v.is_array())
      for (std::size_t i = 0; i < v.size(); ++i) check(v[i], std::string(key) + "[" + std::to_string(i) + "]");
    else
      check(v, key);
  }
  read("n_values", c.n_values);
  read("trials", c.trials);
  read("B", c.B);
  read("M", c.M);
  read("exact_budget", c.exact_budget);
  read("d", c.d);
  read("seed", c.seed);
  read("level", c.level);
  read("alpha", c.alpha);
  read("beta", c.beta);
  read("sbm_block", c.sbm_block);
  read("sbm_pi", c.sbm_pi);
  read("nu", c.nu);
  read("nu_values", c.nu_values);
  read("nu_draws", c.nu_draws);
  read("truth_draws", c.truth_draws);
  read("max_attempts", c.max_attempts);
  read("samples", c.samples);
  read("match_restarts", c.match_restarts);
  read("scheme", c.scheme);
  read("methods", c.methods);
  read("output_dir", c.output_dir);
  validate(c);
  return c;
}

inline ExperimentConfig parse_config(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", e.what());
  }
  return config_from_json(j);
}

}  // namespace rdpgboot
