#pragma once

#include <optional>

#include "sbf/systems.hpp"

namespace sbf {

// Squared-exponential kernel over joint inputs z = (x, u), shared by all
// output dimensions.
struct KernelConfig {
  double signal_variance = 1.0;        // sigma_f^2
  Vec lengthscales;                    // one per input dimension
  double observation_noise_variance = 0.0;  // sigma^2, jitter floor applied at 0
};

double se_kernel(const KernelConfig& cfg, const Vec& a, const Vec& b);

// One GP per output dimension, all sharing the same kernel and training
// inputs, so the Gram factorization is computed once.
struct GPModel {
  KernelConfig kernel;
  Mat Z;          // M x (n+m) training inputs
  Mat weights;    // M x n, column i = K^{-1} Y_i
  Mat L;          // lower Cholesky factor of K = Gram + sigma^2 I
  Mat Kinv;       // explicit inverse of K
  Mat Kinv_pos;   // entrywise positive part of Kinv
  Mat Kinv_neg;   // entrywise negative part, stored as magnitudes
  Vec train_std;  // posterior std at each training input
  double effective_noise = 0.0;  // sigma^2 after the jitter floor
  double log_det_chol = 0.0;     // sum of log L_ii
  int n = 0;
  int m = 0;

  long size() const { return Z.rows(); }
};

struct Posterior {
  Vec mean;
  Vec std;
};

struct RegionBounds {
  Vec mean_lower;
  Vec mean_upper;
  Vec std_upper;
};

struct ErrorBoundConfig {
  double delta = 0.05;
  Vec rkhs_norm_bound;  // C_i per output dimension (size n, or size 1 shared)
  std::optional<double> information_gain;  // computed from the model when absent
};

GPModel fit(const Dataset& data, const KernelConfig& cfg);

Posterior posterior_at(const GPModel& model, const Vec& z);

// Sound enclosure of posterior mean and standard deviation over a box of
// joint inputs.
RegionBounds region_bounds(const GPModel& model, const Box& cell);

// (1/2) log det(I + Gram / sigma^2), reusing the stored factorization.
double information_gain(const GPModel& model);

// alpha_i(delta) = C_i + sigma * sqrt(2 * (gamma + 1 + ln(n/delta)))
Vec alpha_scale(const GPModel& model, const ErrorBoundConfig& cfg);

Vec error_radius_from_std(const GPModel& model, const ErrorBoundConfig& cfg,
                          const Vec& std_upper);

Vec error_radius(const GPModel& model, const ErrorBoundConfig& cfg, const Box& cell);

}  // namespace sbf
