#pragma once

#include "sbf/pruning.hpp"

namespace sbf {

struct ValidationReport {
  long trials = 0;
  int horizon = 0;
  long violations = 0;
  double empirical_safety = 1.0;
  double certified_lower_bound = 0.0;
  bool empirically_consistent = true;  // one-sided 3-sigma binomial check
  bool adversarial_full_set_exited = false;
  bool adversarial_permissible_exited = false;
};

struct TrajectoryPoint {
  int step = 0;
  Vec state;
  Vec control;      // empty on the final point
  bool in_safe_set = true;
};

struct Trajectory {
  long trial = 0;
  std::vector<TrajectoryPoint> points;
  bool exited = false;
};

// Random-strategy rollouts from uniform starts in initial_region; a trial
// violates safety if any visited state leaves the safe set.
ValidationReport monte_carlo(const SystemModel& sys, const NoiseModel& noise,
                             const PermissibleStrategySet& set, const Box& initial_region,
                             int horizon, long trials, uint64_t seed,
                             std::vector<Trajectory>* trajectories = nullptr);

// Boundary-seeking rollout: each step scans a control grid over the allowed
// cells and picks the control whose deterministic successor is closest to
// leaving the safe set, then applies one noisy step.
Trajectory adversarial_rollout(const SystemModel& sys, const NoiseModel& noise,
                               const Partition& partition,
                               const std::vector<std::vector<int>>& allowed_controls,
                               const Vec& x0, int horizon, uint64_t seed);

std::vector<std::vector<int>> full_control_set(const Partition& partition);

// min over dimensions of the distance to the nearest safe-set face; negative
// outside the set
double boundary_distance(const Box& safe_set, const Vec& x);

std::string report_to_json(const ValidationReport& report);

void save_trajectories_csv(const std::vector<Trajectory>& trajectories, int state_dim,
                           int control_dim, const std::filesystem::path& path);

}  // namespace sbf
