#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "sbf/lp.hpp"
#include "sbf/rng.hpp"

using namespace sbf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exhaustive vertex enumeration for small LPs with finite variable bounds:
// every vertex activates n linearly independent constraints drawn from the
// rows and the bounds. Independent of the simplex implementation.
double enumerate_minimum(const lp::Problem& prob) {
  const long n = prob.c.size();
  std::vector<Vec> normals;
  std::vector<double> offsets;  // a.x <= b form
  for (long r = 0; r < prob.A.rows(); ++r) {
    const Vec a = prob.A.row(r).transpose();
    if (prob.rel[r] == '<' || prob.rel[r] == '=') {
      normals.push_back(a);
      offsets.push_back(prob.rhs[r]);
    }
    if (prob.rel[r] == '>' || prob.rel[r] == '=') {
      normals.push_back(-a);
      offsets.push_back(-prob.rhs[r]);
    }
  }
  for (long j = 0; j < n; ++j) {
    REQUIRE(std::isfinite(prob.lower[j]));
    REQUIRE(std::isfinite(prob.upper[j]));
    Vec e = Vec::Zero(n);
    e[j] = 1.0;
    normals.push_back(e);
    offsets.push_back(prob.upper[j]);
    normals.push_back(-e);
    offsets.push_back(-prob.lower[j]);
  }

  const int total = static_cast<int>(normals.size());
  std::vector<int> pick(n);
  double best = kInf;
  const auto feasible = [&](const Vec& x) {
    for (int k = 0; k < total; ++k) {
      if (normals[k].dot(x) > offsets[k] + 1e-7) return false;
    }
    return true;
  };
  // iterate over all n-subsets of the constraint list
  std::vector<int> idx(n);
  for (long j = 0; j < n; ++j) idx[j] = static_cast<int>(j);
  while (true) {
    Mat M(n, n);
    Vec rhs(n);
    for (long j = 0; j < n; ++j) {
      M.row(j) = normals[idx[j]].transpose();
      rhs[j] = offsets[idx[j]];
    }
    Eigen::FullPivLU<Mat> lu(M);
    if (lu.rank() == n) {
      const Vec x = lu.solve(rhs);
      if (feasible(x)) best = std::min(best, prob.c.dot(x));
    }
    long j = n - 1;
    while (j >= 0 && idx[j] == total - n + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (long k = j + 1; k < n; ++k) idx[k] = idx[k - 1] + 1;
  }
  return best;
}

lp::Problem random_feasible_problem(Rng& rng, long n, long rows) {
  lp::Problem prob;
  prob.c = Vec(n);
  prob.lower = Vec(n);
  prob.upper = Vec(n);
  for (long j = 0; j < n; ++j) {
    prob.c[j] = rng.uniform(-2.0, 2.0);
    prob.lower[j] = rng.uniform(-1.0, 0.0);
    prob.upper[j] = prob.lower[j] + rng.uniform(0.5, 2.0);
  }
  Vec interior(n);
  for (long j = 0; j < n; ++j) {
    interior[j] = prob.lower[j] + 0.5 * (prob.upper[j] - prob.lower[j]);
  }
  prob.A = Mat(rows, n);
  prob.rhs = Vec(rows);
  prob.rel.resize(rows);
  for (long r = 0; r < rows; ++r) {
    for (long j = 0; j < n; ++j) prob.A(r, j) = rng.uniform(-1.0, 1.0);
    const double at_interior = prob.A.row(r).dot(interior);
    if (rng.uniform01() < 0.5) {
      prob.rel[r] = '<';
      prob.rhs[r] = at_interior + rng.uniform(0.05, 0.5);
    } else {
      prob.rel[r] = '>';
      prob.rhs[r] = at_interior - rng.uniform(0.05, 0.5);
    }
  }
  return prob;
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("one variable at its constraint") {
  lp::Problem prob;
  prob.c = Vec::Constant(1, 1.0);
  prob.A = Mat::Constant(1, 1, 1.0);
  prob.rel = {'>'};
  prob.rhs = Vec::Constant(1, 3.0);
  prob.lower = Vec::Constant(1, -kInf);
  prob.upper = Vec::Constant(1, 10.0);
  const lp::Solution sol = lp::solve(prob);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("equality row") {
  lp::Problem prob;
  prob.c = Vec::Constant(2, 1.0);
  prob.A = Mat::Constant(1, 2, 1.0);
  prob.rel = {'='};
  prob.rhs = Vec::Constant(1, 2.0);
  prob.lower = Vec::Zero(2);
  prob.upper = Vec::Constant(2, 5.0);
  const lp::Solution sol = lp::solve(prob);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(sol.x.sum() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("negative costs drive variables to their caps") {
  lp::Problem prob;
  prob.c = Vec::Constant(2, -1.0);
  prob.A = Mat::Constant(1, 2, 1.0);
  prob.rel = {'<'};
  prob.rhs = Vec::Constant(1, 1.5);
  prob.lower = Vec::Zero(2);
  prob.upper = Vec::Constant(2, 1.0);
  const lp::Solution sol = lp::solve(prob);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(-1.5).epsilon(1e-9));
}

TEST_CASE("infeasible bounds are detected") {
  lp::Problem prob;
  prob.c = Vec::Constant(1, 1.0);
  prob.A = Mat::Constant(1, 1, 1.0);
  prob.rel = {'>'};
  prob.rhs = Vec::Constant(1, 3.0);
  prob.lower = Vec::Zero(1);
  prob.upper = Vec::Constant(1, 2.0);
  CHECK(lp::solve(prob).status == lp::Status::Infeasible);
}

TEST_CASE("contradictory rows are detected") {
  lp::Problem prob;
  prob.c = Vec::Constant(2, 0.0);
  prob.A = Mat(2, 2);
  prob.A << 1.0, 1.0, -1.0, -1.0;
  prob.rel = {'>', '>'};
  prob.rhs = Vec(2);
  prob.rhs << 3.0, -1.0;  // x+y >= 3 and x+y <= 1
  prob.lower = Vec::Zero(2);
  prob.upper = Vec::Constant(2, 10.0);
  CHECK(lp::solve(prob).status == lp::Status::Infeasible);
}

TEST_CASE("unbounded ray is detected") {
  lp::Problem prob;
  prob.c = Vec::Constant(1, -1.0);
  prob.A = Mat::Constant(1, 1, 1.0);
  prob.rel = {'>'};
  prob.rhs = Vec::Zero(1);
  prob.lower = Vec::Zero(1);
  prob.upper = Vec::Constant(1, kInf);
  CHECK(lp::solve(prob).status == lp::Status::Unbounded);
}

TEST_CASE("free variable rests at zero then moves to the optimum") {
  lp::Problem prob;
  prob.c = Vec::Constant(1, 1.0);
  prob.A = Mat::Constant(1, 1, 1.0);
  prob.rel = {'>'};
  prob.rhs = Vec::Constant(1, -5.0);
  prob.lower = Vec::Constant(1, -kInf);
  prob.upper = Vec::Constant(1, kInf);
  const lp::Solution sol = lp::solve(prob);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.x[0] == doctest::Approx(-5.0).epsilon(1e-9));
}

TEST_CASE("degenerate pivoting terminates") {
  // Beale's classic cycling instance
  lp::Problem prob;
  prob.c = Vec(4);
  prob.c << -0.75, 150.0, -0.02, 6.0;
  prob.A = Mat(3, 4);
  prob.A << 0.25, -60.0, -0.04, 9.0,
            0.5, -90.0, -0.02, 3.0,
            0.0, 0.0, 1.0, 0.0;
  prob.rel = {'<', '<', '<'};
  prob.rhs = Vec(3);
  prob.rhs << 0.0, 0.0, 1.0;
  prob.lower = Vec::Zero(4);
  prob.upper = Vec::Constant(4, kInf);
  const lp::Solution sol = lp::solve(prob);
  REQUIRE(sol.status == lp::Status::Optimal);
  CHECK(sol.objective == doctest::Approx(-0.05).epsilon(1e-9));
}

TEST_CASE("random instances match vertex enumeration") {
  Rng rng(777);
  int optimal_count = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const lp::Problem prob = random_feasible_problem(rng, 5, 3);
    const lp::Solution sol = lp::solve(prob);
    REQUIRE(sol.status == lp::Status::Optimal);
    ++optimal_count;
    const double oracle = enumerate_minimum(prob);
    REQUIRE(std::isfinite(oracle));
    CHECK(sol.objective == doctest::Approx(oracle).epsilon(1e-8));
    // the reported point must satisfy every constraint
    for (long r = 0; r < prob.A.rows(); ++r) {
      const double lhs = prob.A.row(r).dot(sol.x);
      if (prob.rel[r] == '<') CHECK(lhs <= prob.rhs[r] + 1e-7);
      if (prob.rel[r] == '>') CHECK(lhs >= prob.rhs[r] - 1e-7);
      if (prob.rel[r] == '=') CHECK(lhs == doctest::Approx(prob.rhs[r]).epsilon(1e-7));
    }
    for (long j = 0; j < 5; ++j) {
      CHECK(sol.x[j] >= prob.lower[j] - 1e-9);
      CHECK(sol.x[j] <= prob.upper[j] + 1e-9);
    }
  }
  CHECK(optimal_count == 60);
}

TEST_CASE("solves are deterministic") {
  Rng rng(31);
  const lp::Problem prob = random_feasible_problem(rng, 5, 3);
  const lp::Solution a = lp::solve(prob);
  const lp::Solution b = lp::solve(prob);
  REQUIRE(a.status == lp::Status::Optimal);
  CHECK(a.x == b.x);
  CHECK(a.objective == b.objective);
}

}  // TEST_SUITE
