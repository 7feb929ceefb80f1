#include "sbf/pruning.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sbf {

double PermissibleStrategySet::retained_fraction() const {
  size_t kept = 0;
  for (const auto& cells : retained) kept += cells.size();
  const size_t total = retained.size() * partition.num_control_cells();
  return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total);
}

PruneResult synthesize_permissible_set(const TransitionMatrix& matrix,
                                       const Partition& partition, int horizon, double p,
                                       const PruneOptions& opts) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("p must lie in (0,1)");
  const int K = matrix.num_states;
  const int L = matrix.num_controls;
  std::vector<std::vector<int>> active(K);
  for (int i = 0; i < K; ++i) {
    active[i].resize(L);
    for (int l = 0; l < L; ++l) active[i][l] = l;
  }

  PruneResult result;
  CegsPool pool;
  double prev_objective = std::numeric_limits<double>::infinity();
  const int max_iters = K * L - K + 1;
  for (int iter = 0; iter <= max_iters; ++iter) {
    BarrierCertificate cert = synthesize_barrier(matrix, active, partition.initial_cells,
                                                 horizon, opts.synthesis, &pool);
    if (cert.objective > prev_objective + 1e-6) {
      throw std::logic_error("pruning objective increased after a removal");
    }
    prev_objective = cert.objective;
    if (opts.log_progress) {
      std::cerr << "prune iter " << iter << ": objective " << cert.objective << " bound "
                << cert.safety_lower_bound << "\n";
    }
    if (cert.safety_lower_bound >= p) {
      result.feasible = true;
      result.set.retained = active;
      result.set.certificate = cert;
      result.set.removal_log = result.removal_log;
      result.set.partition = partition;
      result.set.p = p;
      result.set.horizon = horizon;
      return result;
    }
    // worst pair by slack requirement, ties to the lowest (i,l)
    int worst = -1;
    for (size_t k = 0; k < cert.beta_matrix.size(); ++k) {
      if (worst < 0 || cert.beta_matrix[k].beta > cert.beta_matrix[worst].beta) {
        worst = static_cast<int>(k);
      }
    }
    if (worst < 0) throw std::logic_error("no removable pair despite unmet threshold");
    const PairBeta target = cert.beta_matrix[worst];
    result.removal_log.push_back(
        {iter, target.state, target.control, target.beta, cert.objective});
    auto& cells = active[target.state];
    cells.erase(std::find(cells.begin(), cells.end(), target.control));
    pool.erase({target.state, target.control});
    if (cells.empty()) return result;  // infeasible: a cell lost its last control
  }
  throw std::logic_error("pruning exceeded its iteration budget");
}

std::vector<CellInvariance> control_invariant_set(const TransitionMatrix& matrix,
                                                  const Partition& partition, int horizon,
                                                  double p, const PruneOptions& opts) {
  std::vector<CellInvariance> out(matrix.num_states);
  for (int i = 0; i < matrix.num_states; ++i) {
    Partition single = partition;
    single.initial_cells = {i};
    const PruneResult res = synthesize_permissible_set(matrix, single, horizon, p, opts);
    out[i].invariant = res.feasible;
    if (res.feasible) {
      out[i].bound = res.set.certificate.safety_lower_bound;
      out[i].retained = res.set.retained;
    }
  }
  return out;
}

Vec strategy_sample(const PermissibleStrategySet& set, const Vec& x, Rng& rng) {
  const auto cell = locate_state_cell(set.partition, x);
  if (!cell) throw std::domain_error("state outside the safe set");
  const std::vector<int>& options = set.retained[*cell];
  const int l = options[static_cast<int>(rng.index(options.size()))];
  return rng.uniform_in(set.partition.control_cells[l]);
}

std::string permissible_set_to_json(const PermissibleStrategySet& set) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"p\":" << set.p << ",\"N\":" << set.horizon << ",\"retained_fraction\":"
      << set.retained_fraction() << ",\"retained\":{";
  for (size_t i = 0; i < set.retained.size(); ++i) {
    if (i) out << ",";
    out << "\"" << i << "\":[";
    for (size_t k = 0; k < set.retained[i].size(); ++k) {
      if (k) out << ",";
      out << set.retained[i][k];
    }
    out << "]";
  }
  out << "},\"removal_log\":[";
  for (size_t k = 0; k < set.removal_log.size(); ++k) {
    const RemovalEvent& ev = set.removal_log[k];
    if (k) out << ",";
    out << "{\"iteration\":" << ev.iteration << ",\"i\":" << ev.state << ",\"l\":" << ev.control
        << ",\"beta_il\":" << ev.beta_il << ",\"objective\":" << ev.objective << "}";
  }
  out << "],\"certificate\":" << certificate_to_json(set.certificate) << "}";
  return out.str();
}

}  // namespace sbf
