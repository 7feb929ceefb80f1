#include "sbf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbf {

double Box::volume() const {
  double v = 1.0;
  for (int d = 0; d < dim(); ++d) v *= width(d);
  return v;
}

bool Box::contains(const Vec& p, double tol) const {
  for (int d = 0; d < dim(); ++d) {
    if (p[d] < lower[d] - tol || p[d] > upper[d] + tol) return false;
  }
  return true;
}

bool Box::intersects(const Box& other, double tol) const {
  for (int d = 0; d < dim(); ++d) {
    if (lower[d] > other.upper[d] + tol || other.lower[d] > upper[d] + tol) return false;
  }
  return true;
}

Box make_box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box corner sizes differ");
  Box b;
  b.lower = Eigen::Map<const Vec>(std::data(lo), static_cast<long>(lo.size()));
  b.upper = Eigen::Map<const Vec>(std::data(hi), static_cast<long>(hi.size()));
  for (int d = 0; d < b.dim(); ++d) {
    if (b.lower[d] > b.upper[d]) throw std::invalid_argument("box has lower > upper");
  }
  return b;
}

std::optional<Box> erode(const Box& b, double margin) {
  if (margin < 0.0) throw std::invalid_argument("erode: negative margin");
  Box out = b;
  out.lower.array() += margin;
  out.upper.array() -= margin;
  for (int d = 0; d < out.dim(); ++d) {
    if (out.lower[d] > out.upper[d]) return std::nullopt;
  }
  return out;
}

Box dilate(const Box& b, double margin) {
  if (margin < 0.0) throw std::invalid_argument("dilate: negative margin");
  Box out = b;
  out.lower.array() -= margin;
  out.upper.array() += margin;
  return out;
}

Box product_box(const Box& a, const Box& b) {
  Box out;
  out.lower.resize(a.dim() + b.dim());
  out.upper.resize(a.dim() + b.dim());
  out.lower << a.lower, b.lower;
  out.upper << a.upper, b.upper;
  return out;
}

std::vector<double> axis_edges(double lo, double hi, double cell_width) {
  if (!(cell_width > 0.0)) throw std::invalid_argument("cell width must be positive");
  if (hi <= lo) throw std::invalid_argument("axis has nonpositive span");
  const double span = hi - lo;
  double ratio = span / cell_width;
  auto count = static_cast<long>(std::floor(ratio + 1e-9));
  if (count < 1) count = 1;
  std::vector<double> edges;
  edges.reserve(static_cast<size_t>(count) + 2);
  for (long k = 0; k < count; ++k) edges.push_back(lo + static_cast<double>(k) * cell_width);
  // leftover strip becomes one extra narrower cell
  if (span - static_cast<double>(count) * cell_width > 1e-9 * std::max(1.0, span)) {
    edges.push_back(lo + static_cast<double>(count) * cell_width);
  }
  edges.push_back(hi);
  return edges;
}

namespace {

std::vector<Box> cells_from_edges(const std::vector<std::vector<double>>& edges) {
  const int dim = static_cast<int>(edges.size());
  std::vector<int> counts(dim);
  long total = 1;
  for (int d = 0; d < dim; ++d) {
    counts[d] = static_cast<int>(edges[d].size()) - 1;
    total *= counts[d];
  }
  std::vector<Box> cells;
  cells.reserve(static_cast<size_t>(total));
  std::vector<int> idx(dim, 0);
  for (long c = 0; c < total; ++c) {
    Box cell;
    cell.lower.resize(dim);
    cell.upper.resize(dim);
    for (int d = 0; d < dim; ++d) {
      cell.lower[d] = edges[d][idx[d]];
      cell.upper[d] = edges[d][idx[d] + 1];
    }
    cells.push_back(std::move(cell));
    // advance multi-index, dimension 0 slowest
    for (int d = dim - 1; d >= 0; --d) {
      if (++idx[d] < counts[d]) break;
      idx[d] = 0;
    }
  }
  return cells;
}

}  // namespace

std::vector<Box> grid_partition(const Box& region, const Vec& cell_width) {
  if (cell_width.size() != region.dim()) throw std::invalid_argument("cell width dimension mismatch");
  std::vector<std::vector<double>> edges(region.dim());
  for (int d = 0; d < region.dim(); ++d) {
    edges[d] = axis_edges(region.lower[d], region.upper[d], cell_width[d]);
  }
  return cells_from_edges(edges);
}

Box Partition::joint_cell(int i, int l) const {
  return product_box(state_cells[static_cast<size_t>(i)], control_cells[static_cast<size_t>(l)]);
}

Partition make_partition(const Box& safe_set, const Box& initial_set,
                         const Vec& state_cell_width, const Box& control_box,
                         const std::vector<int>& control_cells_per_dim) {
  if (initial_set.dim() != safe_set.dim()) throw std::invalid_argument("initial set dimension mismatch");
  for (int d = 0; d < safe_set.dim(); ++d) {
    if (initial_set.lower[d] < safe_set.lower[d] - 1e-12 ||
        initial_set.upper[d] > safe_set.upper[d] + 1e-12) {
      throw std::invalid_argument("initial set must lie inside the safe set");
    }
  }
  if (static_cast<int>(control_cells_per_dim.size()) != control_box.dim()) {
    throw std::invalid_argument("control cell counts dimension mismatch");
  }

  Partition part;
  part.safe_set = safe_set;
  part.control_box = control_box;
  part.initial_set = initial_set;

  part.state_edges.resize(static_cast<size_t>(safe_set.dim()));
  for (int d = 0; d < safe_set.dim(); ++d) {
    part.state_edges[static_cast<size_t>(d)] =
        axis_edges(safe_set.lower[d], safe_set.upper[d], state_cell_width[d]);
  }
  part.control_edges.resize(static_cast<size_t>(control_box.dim()));
  for (int d = 0; d < control_box.dim(); ++d) {
    const int count = control_cells_per_dim[static_cast<size_t>(d)];
    if (count < 1) throw std::invalid_argument("control cell count must be >= 1");
    const double w = control_box.width(d) / static_cast<double>(count);
    std::vector<double> e;
    e.reserve(static_cast<size_t>(count) + 1);
    for (int k = 0; k < count; ++k) e.push_back(control_box.lower[d] + k * w);
    e.push_back(control_box.upper[d]);
    part.control_edges[static_cast<size_t>(d)] = std::move(e);
  }

  {
    std::vector<std::vector<double>> se = part.state_edges;
    part.state_cells = cells_from_edges(se);
    std::vector<std::vector<double>> ce = part.control_edges;
    part.control_cells = cells_from_edges(ce);
  }

  for (int i = 0; i < part.num_state_cells(); ++i) {
    if (part.state_cells[static_cast<size_t>(i)].intersects(initial_set, 1e-12)) {
      part.initial_cells.push_back(i);
    }
  }
  if (part.initial_cells.empty()) throw std::invalid_argument("initial set touches no state cell");
  return part;
}

std::optional<int> locate_index(const std::vector<std::vector<double>>& edges, const Vec& p) {
  const int dim = static_cast<int>(edges.size());
  if (p.size() != dim) throw std::invalid_argument("locate: point dimension mismatch");
  long linear = 0;
  for (int d = 0; d < dim; ++d) {
    const auto& e = edges[static_cast<size_t>(d)];
    const double x = p[d];
    if (x < e.front() || x > e.back()) return std::nullopt;
    // lowest containing cell; shared faces resolve downward
    auto it = std::lower_bound(e.begin(), e.end(), x);
    long k;
    if (it == e.begin()) {
      k = 0;  // x == e.front()
    } else {
      k = static_cast<long>(it - e.begin()) - 1;
    }
    const long cells = static_cast<long>(e.size()) - 1;
    if (k > cells - 1) k = cells - 1;
    linear = linear * cells + k;
  }
  return static_cast<int>(linear);
}

}  // namespace sbf
