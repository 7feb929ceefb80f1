#include "sbf/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sbf/lp.hpp"

namespace sbf {

namespace {

void check_row_feasible(const TransitionRow& row) {
  double sum_lo = 0.0, sum_hi = 0.0;
  for (const ProbInterval& p : row.p) {
    if (p.lo < -1e-12 || p.hi > 1.0 + 1e-12 || p.lo > p.hi + 1e-12) {
      throw std::invalid_argument("transition interval outside [0,1]");
    }
    sum_lo += p.lo;
    sum_hi += p.hi;
  }
  if (sum_lo > 1.0 + 1e-9 || sum_hi < 1.0 - 1e-9) {
    throw std::invalid_argument("transition row is infeasible");
  }
}

}  // namespace

Ordering greedy_order(const Vec& b) {
  const int K = static_cast<int>(b.size());
  Ordering order(K + 1);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int c) {
    const double va = a == K ? 1.0 : b[a];
    const double vc = c == K ? 1.0 : b[c];
    return va > vc;
  });
  return order;
}

std::vector<double> witness_for_order(const TransitionRow& row, const Ordering& order) {
  const size_t n = row.p.size();
  std::vector<double> p(n);
  double mass = 0.0;
  for (size_t j = 0; j < n; ++j) {
    p[j] = row.p[j].lo;
    mass += p[j];
  }
  for (int idx : order) {
    if (mass >= 1.0) break;
    const double add = std::min(row.p[idx].hi - row.p[idx].lo, 1.0 - mass);
    p[idx] += add;
    mass += add;
  }
  return p;
}

WorstCase worst_case_expectation(const Vec& b, const TransitionRow& row) {
  const int K = static_cast<int>(b.size());
  if (static_cast<int>(row.p.size()) != K + 1) {
    throw std::invalid_argument("row length must be one more than the barrier vector");
  }
  check_row_feasible(row);
  WorstCase out;
  out.witness = witness_for_order(row, greedy_order(b));
  out.value = out.witness[K];
  for (int j = 0; j < K; ++j) out.value += b[j] * out.witness[j];
  return out;
}

bool admissible(double beta_il, double eta, double p, int horizon) {
  return beta_il <= (1.0 - eta - p) / horizon + 1e-12;
}

namespace {

struct PairRef {
  int state;
  int control;
};

// Objective stage: minimize eta + N * beta over the pooled cuts. Each cut
// shares the single beta variable; since only the maximum over the per-pair
// slacks enters the objective, the optimal value equals the formulation with
// one slack variable per pair.
lp::Solution solve_master(const TransitionMatrix& matrix, const std::vector<PairRef>& pairs,
                          const std::vector<int>& initial_cells, int horizon, double b_cap,
                          const CegsPool& pool) {
  const int K = matrix.num_states;
  const long nvars = K + 2;  // b_0..b_{K-1}, eta, beta
  long nrows = static_cast<long>(initial_cells.size());
  for (const PairRef& pr : pairs) {
    auto it = pool.find({pr.state, pr.control});
    if (it != pool.end()) nrows += static_cast<long>(it->second.size());
  }
  lp::Problem prob;
  prob.c = Vec::Zero(nvars);
  prob.c[K] = 1.0;
  prob.c[K + 1] = static_cast<double>(horizon);
  prob.A = Mat::Zero(nrows, nvars);
  prob.rhs = Vec::Zero(nrows);
  prob.rel.assign(nrows, '<');
  prob.lower = Vec::Zero(nvars);
  prob.upper = Vec::Ones(nvars);
  prob.upper.head(K).setConstant(b_cap);

  long r = 0;
  for (int i : initial_cells) {
    prob.A(r, i) = 1.0;
    prob.A(r, K) = -1.0;
    ++r;
  }
  for (const PairRef& pr : pairs) {
    auto it = pool.find({pr.state, pr.control});
    if (it == pool.end()) continue;
    const TransitionRow& row = matrix.row(pr.state, pr.control);
    for (const Ordering& order : it->second) {
      const std::vector<double> w = witness_for_order(row, order);
      for (int j = 0; j < K; ++j) prob.A(r, j) = w[j];
      prob.A(r, pr.state) -= 1.0;
      prob.A(r, K + 1) = -1.0;
      prob.rhs[r] = -w[K];
      ++r;
    }
  }
  lp::Solution sol = lp::solve(prob);
  if (sol.status != lp::Status::Optimal) {
    throw std::runtime_error("barrier master lp failed to solve");
  }
  return sol;
}

// Vertex stage: the objective alone leaves the barrier values badly
// underdetermined (any field whose worst slack matches the optimum ties), and
// the removal loop ranks pairs by their slack, so the tie has to be broken in
// a way that leaves each pair's slack meaningful. Re-solve over the same cuts
// with one slack variable per pair, the objective value pinned near the stage
// one optimum, and the total slack minimized. That drives every beta_il to
// the smallest value its pair can achieve, so the surviving slack measures
// how much leakage is intrinsic to the pair rather than which corner of the
// optimal face the simplex happened to return. The pin is a single scalar row
// (not per-variable ceilings) so its headroom cannot be spent once per pair.
struct RefinedVertex {
  bool ok = false;
  Vec b;
  std::vector<double> beta_il;  // per pairs index; slack allotted by the lp
};

RefinedVertex refine_vertex(const TransitionMatrix& matrix, const std::vector<PairRef>& pairs,
                            const std::vector<int>& initial_cells, int horizon, double b_cap,
                            const CegsPool& pool, double v_star) {
  const int K = matrix.num_states;
  const double pin_slack = 1e-6;  // wide enough for the solver's feasibility tolerance

  std::vector<long> slack_var(pairs.size(), -1);
  long nvars = K + 2;  // b_0..b_{K-1}, eta, beta_max, then one slack per pooled pair
  long pooled_rows = 0;
  for (size_t k = 0; k < pairs.size(); ++k) {
    auto it = pool.find({pairs[k].state, pairs[k].control});
    if (it == pool.end() || it->second.empty()) continue;
    slack_var[k] = nvars++;
    pooled_rows += static_cast<long>(it->second.size());
  }
  const long npairs = nvars - (K + 2);
  const long nrows = static_cast<long>(initial_cells.size()) + pooled_rows + npairs + 1;

  lp::Problem prob;
  prob.c = Vec::Zero(nvars);
  prob.A = Mat::Zero(nrows, nvars);
  prob.rhs = Vec::Zero(nrows);
  prob.rel.assign(nrows, '<');
  prob.lower = Vec::Zero(nvars);
  prob.upper = Vec::Ones(nvars);
  prob.upper.head(K).setConstant(b_cap);
  for (size_t k = 0; k < pairs.size(); ++k) {
    if (slack_var[k] >= 0) prob.c[slack_var[k]] = 1.0;
  }

  long r = 0;
  for (int i : initial_cells) {
    prob.A(r, i) = 1.0;
    prob.A(r, K) = -1.0;
    ++r;
  }
  for (size_t k = 0; k < pairs.size(); ++k) {
    if (slack_var[k] < 0) continue;
    const PairRef& pr = pairs[k];
    const TransitionRow& row = matrix.row(pr.state, pr.control);
    for (const Ordering& order : pool.at({pr.state, pr.control})) {
      const std::vector<double> w = witness_for_order(row, order);
      for (int j = 0; j < K; ++j) prob.A(r, j) = w[j];
      prob.A(r, pr.state) -= 1.0;
      prob.A(r, slack_var[k]) = -1.0;
      prob.rhs[r] = -w[K];
      ++r;
    }
    prob.A(r, slack_var[k]) = 1.0;  // beta_il <= beta_max
    prob.A(r, K + 1) = -1.0;
    ++r;
  }
  prob.A(r, K) = 1.0;  // eta + N beta_max pinned at the stage-one optimum
  prob.A(r, K + 1) = static_cast<double>(horizon);
  prob.rhs[r] = v_star + pin_slack;

  RefinedVertex out;
  const lp::Solution sol = lp::solve(prob);
  if (sol.status != lp::Status::Optimal) return out;  // caller falls back
  out.ok = true;
  out.b = sol.x.head(K);
  out.beta_il.assign(pairs.size(), 0.0);
  for (size_t k = 0; k < pairs.size(); ++k) {
    if (slack_var[k] >= 0) out.beta_il[k] = sol.x[slack_var[k]];
  }
  return out;
}

}  // namespace

BarrierCertificate synthesize_barrier(const TransitionMatrix& matrix,
                                      const std::vector<std::vector<int>>& active_controls,
                                      const std::vector<int>& initial_cells, int horizon,
                                      const SynthesisOptions& opts, CegsPool* pool) {
  const int K = matrix.num_states;
  if (static_cast<int>(active_controls.size()) != K) {
    throw std::invalid_argument("active control list must cover every state cell");
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  std::vector<PairRef> pairs;
  for (int i = 0; i < K; ++i) {
    if (active_controls[i].empty()) {
      throw std::invalid_argument("state cell " + std::to_string(i) + " has no active control");
    }
    for (int l : active_controls[i]) {
      check_row_feasible(matrix.row(i, l));
      pairs.push_back({i, l});
    }
  }
  CegsPool local_pool;
  CegsPool& orders = pool ? *pool : local_pool;

  // Adds the greedy witness ordering for b to every pair whose true inner
  // maximum exceeds its linearized allotment. Returns whether anything grew.
  const auto add_violated_cuts = [&](const Vec& b, const std::vector<double>& allot) {
    const Ordering order = greedy_order(b);
    bool violated = false;
    for (size_t k = 0; k < pairs.size(); ++k) {
      const PairRef& pr = pairs[k];
      const TransitionRow& row = matrix.row(pr.state, pr.control);
      const std::vector<double> w = witness_for_order(row, order);
      double value = w[K];
      for (int j = 0; j < K; ++j) value += b[j] * w[j];
      if (value > b[pr.state] + allot[k] + opts.violation_tol) {
        std::vector<Ordering>& bucket = orders[{pr.state, pr.control}];
        if (std::find(bucket.begin(), bucket.end(), order) == bucket.end()) {
          // cap the warm-start pool so removal-heavy runs keep the lp small
          if (bucket.size() >= 16) bucket.erase(bucket.begin());
          bucket.push_back(order);
          violated = true;
        }
      }
    }
    return violated;
  };

  lp::Solution sol;
  Vec b;
  double eta = 0.0, beta = 0.0;
  std::vector<double> allot(pairs.size(), 0.0);
  bool converged = false;
  int iter = 0;
  // Phase one: grow the pool against the objective-stage solution alone; this
  // does the bulk of the cut discovery without paying for the vertex stage.
  for (; iter < opts.max_iterations; ++iter) {
    sol = solve_master(matrix, pairs, initial_cells, horizon, opts.b_cap, orders);
    b = sol.x.head(K);
    eta = sol.x[K];
    beta = sol.x[K + 1];
    allot.assign(pairs.size(), beta);
    if (!add_violated_cuts(b, allot)) break;
  }
  // Phase two: pick the vertex the certificate will actually report and verify
  // the cuts against it, re-tightening both solves until it is a fixed point.
  for (; iter < opts.max_iterations && !converged; ++iter) {
    const RefinedVertex rv = refine_vertex(matrix, pairs, initial_cells, horizon, opts.b_cap,
                                           orders, eta + horizon * beta);
    if (rv.ok) {
      b = rv.b;
      allot = rv.beta_il;
    } else {
      b = sol.x.head(K);
      allot.assign(pairs.size(), beta);
    }
    if (!add_violated_cuts(b, allot)) {
      converged = true;
      break;
    }
    sol = solve_master(matrix, pairs, initial_cells, horizon, opts.b_cap, orders);
    eta = sol.x[K];
    beta = sol.x[K + 1];
  }
  if (!converged) {
    throw std::runtime_error("counterexample synthesis did not converge within " +
                             std::to_string(opts.max_iterations) + " iterations");
  }

  BarrierCertificate cert;
  cert.b = b;
  cert.horizon = horizon;
  cert.beta_matrix.reserve(pairs.size());
  double beta_max = 0.0;
  for (const PairRef& pr : pairs) {
    const WorstCase wc = worst_case_expectation(b, matrix.row(pr.state, pr.control));
    const double beta_il = std::max(0.0, wc.value - b[pr.state]);
    cert.beta_matrix.push_back({pr.state, pr.control, beta_il});
    beta_max = std::max(beta_max, beta_il);
  }
  cert.eta = 0.0;
  for (int i : initial_cells) cert.eta = std::max(cert.eta, b[i]);
  cert.beta = beta_max;
  cert.objective = cert.eta + horizon * cert.beta;
  cert.safety_lower_bound = std::min(1.0, std::max(0.0, 1.0 - cert.objective));
  return cert;
}

double certificate_violation(const BarrierCertificate& cert, const TransitionMatrix& matrix,
                             const std::vector<std::vector<int>>& active_controls,
                             const std::vector<int>& initial_cells) {
  double worst = 0.0;
  for (int i : initial_cells) worst = std::max(worst, cert.b[i] - cert.eta);
  size_t idx = 0;
  for (int i = 0; i < matrix.num_states; ++i) {
    for (int l : active_controls[i]) {
      const WorstCase wc = worst_case_expectation(cert.b, matrix.row(i, l));
      double beta_il = cert.beta;
      if (idx < cert.beta_matrix.size() && cert.beta_matrix[idx].state == i &&
          cert.beta_matrix[idx].control == l) {
        beta_il = cert.beta_matrix[idx].beta;
        ++idx;
      }
      worst = std::max(worst, wc.value - cert.b[i] - beta_il);
      worst = std::max(worst, beta_il - cert.beta);
    }
  }
  for (int j = 0; j < cert.b.size(); ++j) {
    worst = std::max(worst, -cert.b[j]);
    worst = std::max(worst, cert.b[j] - 1.0);
  }
  return worst;
}

std::string certificate_to_json(const BarrierCertificate& cert) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"eta\":" << cert.eta << ",\"beta\":" << cert.beta << ",\"N\":" << cert.horizon
      << ",\"safety_lower_bound\":" << cert.safety_lower_bound << ",\"b\":[";
  for (long j = 0; j < cert.b.size(); ++j) {
    if (j) out << ",";
    out << cert.b[j];
  }
  out << "],\"beta_matrix\":[";
  for (size_t k = 0; k < cert.beta_matrix.size(); ++k) {
    if (k) out << ",";
    out << "{\"i\":" << cert.beta_matrix[k].state << ",\"l\":" << cert.beta_matrix[k].control
        << ",\"beta_il\":" << cert.beta_matrix[k].beta << "}";
  }
  out << "]}";
  return out.str();
}

}  // namespace sbf
