#pragma once

// Executes a parsed experiment config: runs the selected analyses (in
// parallel unless asked not to), assembles one JSON report plus one CSV per
// tabular task, and writes everything from a single thread in declared task
// order. report.json is byte-identical across serial runs of the same config
// and build; wall-clock numbers go to a separate timings.csv so they cannot
// break that.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pflab/config.hpp"

namespace pflab {

struct RunOptions {
  bool serial = false;
  std::optional<std::string> output_dir;  // overrides the config when set
  std::optional<int> grid_m;              // overrides the config when set
};

struct TaskTiming {
  std::string name;
  double seconds = 0.0;
};

struct RunOutcome {
  nlohmann::ordered_json report;
  std::vector<TaskTiming> timings;
  std::vector<std::string> files_written;
  // 0: all tasks succeeded; 1: could not run or write at all;
  // 2: ran, but at least one task failed.
  int exit_code = 0;
  std::vector<std::string> errors;  // I/O level problems
};

RunOutcome run_experiment(const ExperimentConfig& cfg, const RunOptions& opt);

}  // namespace pflab
