#include "sbf/validation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sbf {

double boundary_distance(const Box& safe_set, const Vec& x) {
  double dist = std::numeric_limits<double>::infinity();
  for (long d = 0; d < safe_set.dim(); ++d) {
    dist = std::min(dist, std::min(x[d] - safe_set.lower[d], safe_set.upper[d] - x[d]));
  }
  return dist;
}

ValidationReport monte_carlo(const SystemModel& sys, const NoiseModel& noise,
                             const PermissibleStrategySet& set, const Box& initial_region,
                             int horizon, long trials, uint64_t seed,
                             std::vector<Trajectory>* trajectories) {
  if (trials < 1) throw std::invalid_argument("trial count must be >= 1");
  ValidationReport report;
  report.trials = trials;
  report.horizon = horizon;
  report.certified_lower_bound = set.certificate.safety_lower_bound;
  const Box& safe = set.partition.safe_set;
  for (long t = 0; t < trials; ++t) {
    Rng rng(seed + static_cast<uint64_t>(t));
    Vec x = rng.uniform_in(initial_region);
    Trajectory traj;
    traj.trial = t;
    bool violated = false;
    for (int s = 0; s < horizon; ++s) {
      if (!safe.contains(x)) {
        violated = true;
        if (trajectories) traj.points.push_back({s, x, Vec(), false});
        break;
      }
      const Vec u = strategy_sample(set, x, rng);
      if (trajectories) traj.points.push_back({s, x, u, true});
      Vec w(sys.n);
      for (int d = 0; d < sys.n; ++d) w[d] = noise.sigma[d] * rng.gaussian();
      x = step(sys, x, u, w);
    }
    if (!violated) {
      const bool final_safe = safe.contains(x);
      if (!final_safe) violated = true;
      if (trajectories) traj.points.push_back({horizon, x, Vec(), final_safe});
    }
    if (violated) ++report.violations;
    if (trajectories) {
      traj.exited = violated;
      trajectories->push_back(std::move(traj));
    }
  }
  report.empirical_safety =
      1.0 - static_cast<double>(report.violations) / static_cast<double>(report.trials);
  const double q = 1.0 - report.certified_lower_bound;
  const double allowance =
      q + 3.0 * std::sqrt(std::max(q * (1.0 - q), 0.0) / static_cast<double>(trials));
  report.empirically_consistent =
      static_cast<double>(report.violations) / static_cast<double>(trials) <= allowance + 1e-12;
  return report;
}

std::vector<std::vector<int>> full_control_set(const Partition& partition) {
  std::vector<std::vector<int>> all(partition.num_state_cells());
  for (auto& cells : all) {
    cells.resize(partition.num_control_cells());
    for (int l = 0; l < partition.num_control_cells(); ++l) cells[l] = l;
  }
  return all;
}

namespace {

// 25 candidate controls per control cell: 25 points for one control
// dimension, a 5x5 grid for two, interior-offset so candidates stay strictly
// inside the cell.
std::vector<Vec> control_grid(const Box& cell) {
  const long m = cell.dim();
  const int per_dim = m == 1 ? 25 : 5;
  std::vector<Vec> points;
  std::vector<int> idx(m, 0);
  for (;;) {
    Vec u(m);
    for (long d = 0; d < m; ++d) {
      u[d] = cell.lower[d] + (idx[d] + 0.5) * cell.width(d) / per_dim;
    }
    points.push_back(u);
    long d = 0;
    for (; d < m; ++d) {
      if (++idx[d] < per_dim) break;
      idx[d] = 0;
    }
    if (d == m) break;
  }
  return points;
}

}  // namespace

Trajectory adversarial_rollout(const SystemModel& sys, const NoiseModel& noise,
                               const Partition& partition,
                               const std::vector<std::vector<int>>& allowed_controls,
                               const Vec& x0, int horizon, uint64_t seed) {
  Rng rng(seed);
  Trajectory traj;
  Vec x = x0;
  for (int s = 0; s < horizon; ++s) {
    const auto cell = locate_state_cell(partition, x);
    if (!cell) {
      traj.points.push_back({s, x, Vec(), false});
      traj.exited = true;
      return traj;
    }
    double best = std::numeric_limits<double>::infinity();
    Vec best_u;
    for (int l : allowed_controls[*cell]) {
      for (const Vec& u : control_grid(partition.control_cells[l])) {
        const double score = boundary_distance(partition.safe_set, eval_dynamics(sys, x, u));
        if (score < best) {
          best = score;
          best_u = u;
        }
      }
    }
    traj.points.push_back({s, x, best_u, true});
    Vec w(sys.n);
    for (int d = 0; d < sys.n; ++d) w[d] = noise.sigma[d] * rng.gaussian();
    x = step(sys, x, best_u, w);
  }
  const bool final_safe = partition.safe_set.contains(x);
  traj.points.push_back({horizon, x, Vec(), final_safe});
  traj.exited = !final_safe;
  return traj;
}

std::string report_to_json(const ValidationReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"trials\":" << report.trials << ",\"horizon\":" << report.horizon
      << ",\"violations\":" << report.violations << ",\"empirical_safety\":"
      << report.empirical_safety << ",\"certified_lower_bound\":"
      << report.certified_lower_bound << ",\"empirically_consistent\":"
      << (report.empirically_consistent ? "true" : "false")
      << ",\"adversarial_full_set_exited\":"
      << (report.adversarial_full_set_exited ? "true" : "false")
      << ",\"adversarial_permissible_exited\":"
      << (report.adversarial_permissible_exited ? "true" : "false") << "}";
  return out.str();
}

void save_trajectories_csv(const std::vector<Trajectory>& trajectories, int state_dim,
                           int control_dim, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << "trial,step";
  for (int d = 0; d < state_dim; ++d) f << ",x" << d + 1;
  for (int d = 0; d < control_dim; ++d) f << ",u" << d + 1;
  f << ",in_safe_set\n";
  char buf[40];
  for (const Trajectory& traj : trajectories) {
    for (const TrajectoryPoint& pt : traj.points) {
      f << traj.trial << "," << pt.step;
      for (int d = 0; d < state_dim; ++d) {
        auto res = std::to_chars(buf, buf + sizeof(buf), pt.state[d]);
        f << ",";
        f.write(buf, res.ptr - buf);
      }
      for (int d = 0; d < control_dim; ++d) {
        f << ",";
        if (pt.control.size() == static_cast<long>(control_dim)) {
          auto res = std::to_chars(buf, buf + sizeof(buf), pt.control[d]);
          f.write(buf, res.ptr - buf);
        }
      }
      f << "," << (pt.in_safe_set ? 1 : 0) << "\n";
    }
  }
}

}  // namespace sbf
