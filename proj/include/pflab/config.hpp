#pragma once

// Experiment configs for the batch front end: a strict-schema JSON document
// naming one density model, an ordered task list, and per-task parameters.
// Unknown keys are rejected everywhere, complex entries are [re, im] pairs,
// and validation returns diagnostics instead of throwing so a config can be
// linted without running anything.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pflab/models.hpp"
#include "pflab/subspace.hpp"

namespace pflab {

inline const std::vector<std::string> kKnownTasks = {
    "autocov", "factorize", "conditions", "angles",
    "intersect", "predictor", "report"};

// Parsed config with every default materialized; `model` is engaged exactly
// when parsing produced no diagnostics.
struct ExperimentConfig {
  std::optional<DensityModel> model;
  std::vector<std::string> tasks;

  int autocov_max_lag = 8;

  int factorize_order = 256;
  int factorize_order_cap = 4096;
  double factorize_tol = 1e-10;
  int isometry_count = 3;

  std::vector<int> angles_horizons = {1, 2, 4, 8, 16};
  double angles_tol = kRankTol;

  std::vector<long> intersect_a;
  std::vector<long> intersect_b;
  double intersect_tol = kRankTol;

  int predictor_order = 64;

  std::optional<int> declared_dim;  // optional cross-check against the model

  std::string output_dir = "out";
  unsigned long long seed = 1;
  int grid_m = 14;
};

struct ParsedConfig {
  std::optional<ExperimentConfig> config;  // engaged iff diagnostics empty
  std::vector<std::string> diagnostics;
};

ParsedConfig parse_config(const nlohmann::ordered_json& doc);
ParsedConfig load_config(const std::string& path);

// Normalized echo of a parsed config, defaults included, in a fixed key
// order; reports embed this so a run is reproducible from its own output.
nlohmann::ordered_json echo_config(const ExperimentConfig& cfg);

}  // namespace pflab
