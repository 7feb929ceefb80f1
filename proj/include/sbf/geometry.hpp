#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace sbf {

using Vec = Eigen::VectorXd;

/// Axis-aligned closed box [lower, upper].
struct Box {
  Vec lower;
  Vec upper;

  int dim() const { return static_cast<int>(lower.size()); }
  double width(int d) const { return upper[d] - lower[d]; }
  Vec center() const { return 0.5 * (lower + upper); }
  double volume() const;
  bool contains(const Vec& p, double tol = 0.0) const;
  bool intersects(const Box& other, double tol = 0.0) const;
};

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi);

/// Shrink by a nonnegative margin on every face. Empty result -> nullopt.
std::optional<Box> erode(const Box& b, double margin);

/// Grow by a nonnegative margin on every face.
Box dilate(const Box& b, double margin);

/// Cartesian product of two boxes (state x control and so on).
Box product_box(const Box& a, const Box& b);

/// Cell edges along one axis. Widths that do not divide the span exactly
/// leave a final narrower cell; spans within 1e-9 of an integer multiple
/// are treated as exact.
std::vector<double> axis_edges(double lo, double hi, double cell_width);

/// Uniform grid over a box. cell_width is per dimension; cells are ordered
/// lexicographically by multi-index with dimension 0 slowest.
std::vector<Box> grid_partition(const Box& region, const Vec& cell_width);

/// Joint state/control partition of the safe set and the control box,
/// together with the indices of cells that touch the initial set.
struct Partition {
  Box safe_set;
  Box control_box;
  Box initial_set;
  std::vector<std::vector<double>> state_edges;    // per state dimension
  std::vector<std::vector<double>> control_edges;  // per control dimension
  std::vector<Box> state_cells;
  std::vector<Box> control_cells;
  std::vector<int> initial_cells;  // sorted, ascending

  int num_state_cells() const { return static_cast<int>(state_cells.size()); }
  int num_control_cells() const { return static_cast<int>(control_cells.size()); }
  /// Joint input cell X_i x U_l.
  Box joint_cell(int i, int l) const;
};

Partition make_partition(const Box& safe_set, const Box& initial_set,
                         const Vec& state_cell_width, const Box& control_box,
                         const std::vector<int>& control_cells_per_dim);

/// Index of the cell containing p, or nullopt when p lies outside the grid.
/// Points on shared faces resolve to the lowest containing index.
std::optional<int> locate_index(const std::vector<std::vector<double>>& edges, const Vec& p);

inline std::optional<int> locate_state_cell(const Partition& part, const Vec& x) {
  return locate_index(part.state_edges, x);
}

}  // namespace sbf
