#pragma once

#include "sbf/barrier.hpp"
#include "sbf/rng.hpp"

namespace sbf {

struct RemovalEvent {
  int iteration = 0;
  int state = -1;
  int control = -1;
  double beta_il = 0.0;
  double objective = 0.0;  // eta + N*beta of the certificate that chose this removal
};

struct PermissibleStrategySet {
  std::vector<std::vector<int>> retained;  // per state cell, sorted control indices
  BarrierCertificate certificate;
  std::vector<RemovalEvent> removal_log;
  Partition partition;
  double p = 0.0;
  int horizon = 0;

  double retained_fraction() const;
};

struct PruneResult {
  bool feasible = false;
  PermissibleStrategySet set;              // populated when feasible
  std::vector<RemovalEvent> removal_log;   // always populated
};

struct PruneOptions {
  SynthesisOptions synthesis;
  bool log_progress = false;
};

// Iteratively removes the state-control pair with the largest slack
// requirement until the certified bound reaches p or some cell runs out of
// controls.
PruneResult synthesize_permissible_set(const TransitionMatrix& matrix,
                                       const Partition& partition, int horizon, double p,
                                       const PruneOptions& opts = {});

struct CellInvariance {
  bool invariant = false;
  double bound = 0.0;
  std::vector<std::vector<int>> retained;  // empty when not invariant
};

// Runs the pruning loop once per state cell with that cell as the sole
// initial cell.
std::vector<CellInvariance> control_invariant_set(const TransitionMatrix& matrix,
                                                  const Partition& partition, int horizon,
                                                  double p, const PruneOptions& opts = {});

// Uniformly picks one retained control cell for the cell containing x, then a
// control uniformly within it.
Vec strategy_sample(const PermissibleStrategySet& set, const Vec& x, Rng& rng);

std::string permissible_set_to_json(const PermissibleStrategySet& set);

}  // namespace sbf
