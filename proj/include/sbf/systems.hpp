#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "sbf/geometry.hpp"

namespace sbf {

using Mat = Eigen::MatrixXd;

enum class SystemKind { Linear, Dubins };

/// Discrete-time control system x' = f(x, u) + w.
struct SystemModel {
  SystemKind kind = SystemKind::Linear;
  int n = 0;  // state dimension
  int m = 0;  // control dimension
  Mat A;      // linear: x' = A x + B u
  Mat B;
  double speed = 0.2;  // dubins step length
  Box control_box;

  static SystemModel linear(const Mat& A, const Mat& B, const Box& control_box);
  /// Planar unicycle-style step: x' = x + speed * (cos u, sin u).
  static SystemModel dubins();
};

/// Zero-mean diagonal Gaussian process noise.
struct NoiseModel {
  Vec sigma;  // per state dimension, all > 0
};

NoiseModel make_noise(const Vec& sigma);

/// Noise-free dynamics f(x, u). Throws std::invalid_argument when u lies
/// outside the control box.
Vec eval_dynamics(const SystemModel& sys, const Vec& x, const Vec& u);

/// One transition x' = f(x, u) + noise_draw.
Vec step(const SystemModel& sys, const Vec& x, const Vec& u, const Vec& noise_draw);

/// Exact range of f over a joint input box (state dims first, control after).
/// Used when the dynamics are treated as known.
Box dynamics_range(const SystemModel& sys, const Box& joint_cell);

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input/output pairs ((x, u), x') stored row-wise.
struct Dataset {
  int n = 0;
  int m = 0;
  Mat inputs;   // M x (n+m)
  Mat outputs;  // M x n

  long size() const { return inputs.rows(); }
};

/// Draw M inputs uniformly from sampling_region (an (n+m)-dim box) and record
/// one noisy transition for each.
Dataset generate_dataset(const SystemModel& sys, const NoiseModel& noise,
                         const Box& sampling_region, long M, uint64_t seed);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace sbf
