#include "sbf/transition.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace sbf {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Phi(b) - Phi(a) for standardized a <= b, using erfc on whichever tail the
// interval sits in so the difference keeps relative accuracy.
double std_normal_diff(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return 0.0;
  if (b <= a) return 0.0;
  if (a >= 0.0) return 0.5 * (std::erfc(a * kInvSqrt2) - std::erfc(b * kInvSqrt2));
  if (b <= 0.0) return 0.5 * (std::erfc(-b * kInvSqrt2) - std::erfc(-a * kInvSqrt2));
  return 0.5 * (std::erf(b * kInvSqrt2) - std::erf(a * kInvSqrt2));
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

}  // namespace

double gaussian_mass(double a, double b, double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  return std_normal_diff((a - mu) / sigma, (b - mu) / sigma);
}

EnclosureFn gp_enclosure(const GPModel& model, const ErrorBoundConfig& cfg) {
  const Vec alpha = alpha_scale(model, cfg);  // validates cfg up front
  return [&model, cfg, alpha](const Box& joint_cell) {
    const RegionBounds rb = region_bounds(model, joint_cell);
    CellEnclosure enc;
    enc.mean_box.lower = rb.mean_lower;
    enc.mean_box.upper = rb.mean_upper;
    enc.epsilon = alpha.cwiseProduct(rb.std_upper);
    enc.delta = cfg.delta;
    return enc;
  };
}

EnclosureFn known_enclosure(const SystemModel& sys) {
  return [sys](const Box& joint_cell) {
    CellEnclosure enc;
    enc.mean_box = dynamics_range(sys, joint_cell);
    enc.epsilon = Vec::Zero(sys.n);
    enc.delta = 0.0;
    return enc;
  };
}

Box post_image(const GPModel& model, const Box& joint_cell, const Box& uncertainty) {
  const RegionBounds rb = region_bounds(model, joint_cell);
  if (uncertainty.dim() != model.n) throw std::invalid_argument("uncertainty dimension mismatch");
  Box out;
  out.lower = rb.mean_lower + uncertainty.lower;
  out.upper = rb.mean_upper + uncertainty.upper;
  return out;
}

ProbInterval interval_from_enclosure(const CellEnclosure& enc, const NoiseModel& noise,
                                     const Box& target) {
  const long n = enc.mean_box.dim();
  if (target.dim() != n || enc.epsilon.size() != n || noise.sigma.size() != n) {
    throw std::invalid_argument("dimension mismatch in transition interval");
  }
  double lo = 1.0, hi = 1.0;
  for (long d = 0; d < n; ++d) {
    const double sw = noise.sigma[d];
    const double eps = enc.epsilon[d];
    const double m_lo = enc.mean_box.lower[d];
    const double m_hi = enc.mean_box.upper[d];
    // worst case over the mean enclosure, target shrunk by eps
    lo *= std_normal_diff((target.lower[d] + eps - m_lo) / sw,
                          (target.upper[d] - eps - m_hi) / sw);
    // best case, target dilated by eps
    hi *= std_normal_diff((target.lower[d] - eps - m_hi) / sw,
                          (target.upper[d] + eps - m_lo) / sw);
  }
  ProbInterval out;
  out.lo = clamp01((1.0 - enc.delta) * lo);
  out.hi = clamp01(hi + enc.delta);
  return out;
}

ProbInterval unsafe_from_enclosure(const CellEnclosure& enc, const NoiseModel& noise,
                                   const Box& safe_set) {
  const ProbInterval safe = interval_from_enclosure(enc, noise, safe_set);
  ProbInterval out;
  out.lo = clamp01(1.0 - safe.hi);
  out.hi = clamp01(1.0 - safe.lo);
  return out;
}

ProbInterval transition_interval(const GPModel& model, const ErrorBoundConfig& cfg,
                                 const NoiseModel& noise, const Box& joint_cell,
                                 const Box& target) {
  return interval_from_enclosure(gp_enclosure(model, cfg)(joint_cell), noise, target);
}

ProbInterval unsafe_interval(const GPModel& model, const ErrorBoundConfig& cfg,
                             const NoiseModel& noise, const Box& joint_cell,
                             const Box& safe_set) {
  return unsafe_from_enclosure(gp_enclosure(model, cfg)(joint_cell), noise, safe_set);
}

TransitionMatrix build_matrix(const EnclosureFn& enclosure, const NoiseModel& noise,
                              const Partition& partition) {
  const int K = partition.num_state_cells();
  const int L = partition.num_control_cells();
  TransitionMatrix matrix;
  matrix.num_states = K;
  matrix.num_controls = L;
  matrix.rows.resize(static_cast<size_t>(K) * L);
  long widened = 0;
  for (int i = 0; i < K; ++i) {
    for (int l = 0; l < L; ++l) {
      const CellEnclosure enc = enclosure(partition.joint_cell(i, l));
      TransitionRow& row = matrix.rows[static_cast<size_t>(i) * L + l];
      row.state = i;
      row.control = l;
      row.p.resize(K + 1);
      double sum_lo = 0.0, sum_hi = 0.0;
      for (int j = 0; j < K; ++j) {
        row.p[j] = interval_from_enclosure(enc, noise, partition.state_cells[j]);
        sum_lo += row.p[j].lo;
        sum_hi += row.p[j].hi;
      }
      row.p[K] = unsafe_from_enclosure(enc, noise, partition.safe_set);
      sum_lo += row.p[K].lo;
      sum_hi += row.p[K].hi;
      if (sum_lo > 1.0 + 1e-9) {
        throw std::runtime_error("transition row lower bounds exceed 1, bounds are unsound");
      }
      if (sum_lo > 1.0) {
        // shave the floating-point overshoot off the largest lower bound
        double excess = sum_lo - 1.0;
        for (int j = K; j >= 0 && excess > 0.0; --j) {
          const double cut = std::min(excess, row.p[j].lo);
          row.p[j].lo -= cut;
          excess -= cut;
        }
      }
      if (sum_hi < 1.0) {
        ++widened;
        double deficit = 1.0 - sum_hi;
        // absorb into the unsafe entry first, then spill over as needed
        for (int j = K; j >= 0 && deficit > 0.0; --j) {
          const double room = 1.0 - row.p[j].hi;
          const double add = std::min(room, deficit);
          row.p[j].hi += add;
          deficit -= add;
        }
      }
    }
  }
  if (widened > 0) {
    std::cerr << "warning: widened upper transition bounds in " << widened
              << " rows to restore row feasibility\n";
  }
  return matrix;
}

TransitionMatrix build_matrix(const GPModel& model, const ErrorBoundConfig& cfg,
                              const NoiseModel& noise, const Partition& partition) {
  return build_matrix(gp_enclosure(model, cfg), noise, partition);
}

std::string matrix_to_json(const TransitionMatrix& matrix) {
  std::ostringstream out;
  out.precision(17);
  out << "[";
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    const TransitionRow& row = matrix.rows[r];
    if (r) out << ",";
    out << "{\"i\":" << row.state << ",\"l\":" << row.control << ",\"intervals\":[";
    for (size_t j = 0; j < row.p.size(); ++j) {
      if (j) out << ",";
      out << "[" << row.p[j].lo << "," << row.p[j].hi << "]";
    }
    out << "]}";
  }
  out << "]";
  return out.str();
}

}  // namespace sbf
