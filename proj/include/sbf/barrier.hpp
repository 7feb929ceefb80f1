#pragma once

#include <map>
#include <utility>
#include <vector>

#include "sbf/transition.hpp"

namespace sbf {

struct PairBeta {
  int state = -1;
  int control = -1;
  double beta = 0.0;
};

// Piecewise-constant barrier: one value per safe state cell, 1 outside the
// safe set. safety_lower_bound = max(0, 1 - (eta + beta * N)).
struct BarrierCertificate {
  Vec b;
  double eta = 0.0;
  double beta = 0.0;
  std::vector<PairBeta> beta_matrix;
  double safety_lower_bound = 0.0;
  int horizon = 0;
  double objective = 0.0;  // eta + N * beta
};

// A destination ordering (permutation of {0..K}, K = unsafe index) fixes the
// greedy witness distribution for every row, so each one pooled per
// state-control pair linearizes the inner maximum.
using Ordering = std::vector<int>;
using CegsPool = std::map<std::pair<int, int>, std::vector<Ordering>>;

struct SynthesisOptions {
  double b_cap = 0.999;     // keeps the slack signals informative, see README
  int max_iterations = 50;  // counterexample rounds before failing loudly
  double violation_tol = 1e-8;
};

struct WorstCase {
  double value = 0.0;
  std::vector<double> witness;
};

// max over the row's feasible distributions of sum_j b_j p_j + p_unsafe.
WorstCase worst_case_expectation(const Vec& b, const TransitionRow& row);

// Descending payoff order for (b, 1), ties by lowest index.
Ordering greedy_order(const Vec& b);

std::vector<double> witness_for_order(const TransitionRow& row, const Ordering& order);

BarrierCertificate synthesize_barrier(const TransitionMatrix& matrix,
                                      const std::vector<std::vector<int>>& active_controls,
                                      const std::vector<int>& initial_cells, int horizon,
                                      const SynthesisOptions& opts = {},
                                      CegsPool* pool = nullptr);

// Re-checks the certificate against freshly computed worst-case expectations.
// Returns the largest constraint violation found.
double certificate_violation(const BarrierCertificate& cert, const TransitionMatrix& matrix,
                             const std::vector<std::vector<int>>& active_controls,
                             const std::vector<int>& initial_cells);

// true iff beta_il <= (1 - eta - p) / N, inclusive of the boundary
bool admissible(double beta_il, double eta, double p, int horizon);

std::string certificate_to_json(const BarrierCertificate& cert);

}  // namespace sbf
