#pragma once

#include <functional>
#include <vector>

#include "sbf/gp.hpp"
#include "sbf/systems.hpp"

namespace sbf {

// Everything the transition bounds need to know about one state-control cell:
// a box enclosing the one-step mean image, a per-dimension learning-error
// radius, and the residual probability mass of the error event.
struct CellEnclosure {
  Box mean_box;
  Vec epsilon;
  double delta = 0.0;
};

using EnclosureFn = std::function<CellEnclosure(const Box& joint_cell)>;

// Adapter over a fitted model. The model and config must outlive the callable.
EnclosureFn gp_enclosure(const GPModel& model, const ErrorBoundConfig& cfg);

// Adapter over known dynamics: exact image enclosure, zero error radius.
EnclosureFn known_enclosure(const SystemModel& sys);

struct ProbInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// One state-control pair's row: K destination intervals followed by the
// unsafe complement at index K.
struct TransitionRow {
  int state = -1;
  int control = -1;
  std::vector<ProbInterval> p;
};

struct TransitionMatrix {
  int num_states = 0;
  int num_controls = 0;
  std::vector<TransitionRow> rows;  // indexed state * num_controls + control

  const TransitionRow& row(int i, int l) const { return rows[i * num_controls + l]; }
};

// P(a <= N(mu, sigma^2) <= b) evaluated without cancellation in the tails.
double gaussian_mass(double a, double b, double mu, double sigma);

Box post_image(const GPModel& model, const Box& joint_cell, const Box& uncertainty);

ProbInterval interval_from_enclosure(const CellEnclosure& enc, const NoiseModel& noise,
                                     const Box& target);

ProbInterval unsafe_from_enclosure(const CellEnclosure& enc, const NoiseModel& noise,
                                   const Box& safe_set);

ProbInterval transition_interval(const GPModel& model, const ErrorBoundConfig& cfg,
                                 const NoiseModel& noise, const Box& joint_cell,
                                 const Box& target);

ProbInterval unsafe_interval(const GPModel& model, const ErrorBoundConfig& cfg,
                             const NoiseModel& noise, const Box& joint_cell,
                             const Box& safe_set);

// All rows for the partition's state-control pairs, with per-row feasibility
// (sum of lower bounds <= 1 <= sum of upper bounds) enforced.
TransitionMatrix build_matrix(const EnclosureFn& enclosure, const NoiseModel& noise,
                              const Partition& partition);

TransitionMatrix build_matrix(const GPModel& model, const ErrorBoundConfig& cfg,
                              const NoiseModel& noise, const Partition& partition);

std::string matrix_to_json(const TransitionMatrix& matrix);

}  // namespace sbf
