#pragma once

#include <filesystem>

#include "sbf/gp.hpp"
#include "sbf/systems.hpp"

namespace sbf {

struct RunConfig {
  SystemModel system;
  bool known_system = false;
  NoiseModel noise;
  Box safe_set;
  Box initial_set;
  Vec state_cell_width;
  std::vector<int> control_cells_per_dim;
  KernelConfig kernel;
  ErrorBoundConfig error;
  long data_count = 500;
  int horizon = 100;
  double p = 0.999;
  uint64_t seed = 0;
  long trials = 1000;
  Vec adversarial_start;  // defaults to the initial-set center
  std::filesystem::path out_dir = "out";
};

// Flat key-value config with [section] headers. Throws ParseError naming the
// offending key.
RunConfig load_config(const std::filesystem::path& path);

Partition make_run_partition(const RunConfig& cfg);

}  // namespace sbf
