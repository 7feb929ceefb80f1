#include <cmath>

#include "doctest.h"
#include "sbf/artifacts.hpp"
#include "sbf/rng.hpp"
#include "sbf/transition.hpp"

using namespace sbf;

namespace {

CellEnclosure point_enclosure(const Vec& mu) {
  CellEnclosure enc;
  enc.mean_box = Box{mu, mu};
  enc.epsilon = Vec::Zero(mu.size());
  enc.delta = 0.0;
  return enc;
}

double erf_mass(double a, double b, double mu, double sigma) {
  const double lo = (a - mu) / (sigma * std::sqrt(2.0));
  const double hi = (b - mu) / (sigma * std::sqrt(2.0));
  return 0.5 * (std::erf(hi) - std::erf(lo));
}

}  // namespace

TEST_SUITE("transition") {

TEST_CASE("gaussian mass basics") {
  CHECK(gaussian_mass(-100.0, 100.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gaussian_mass(0.0, 100.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gaussian_mass(1.0, 0.5, 0.0, 1.0) == 0.0);  // inverted interval

  for (double mu : {-0.3, 0.0, 1.7}) {
    for (double sigma : {0.01, 0.5, 2.0}) {
      CHECK(gaussian_mass(-0.2, 0.9, mu, sigma) ==
            doctest::Approx(erf_mass(-0.2, 0.9, mu, sigma)).epsilon(1e-13));
    }
  }
}

TEST_CASE("gaussian mass is accurate in far tails") {
  // both endpoints far in the same tail: erf would cancel catastrophically
  const double m = gaussian_mass(8.0, 9.0, 0.0, 1.0);
  CHECK(m > 0.0);
  CHECK(m == doctest::Approx(6.219831985865866e-16).epsilon(1e-10));
}

TEST_CASE("point enclosure gives the exact gaussian rectangle") {
  Vec mu(2);
  mu << 0.3, 0.6;
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.05));
  const Box target = make_box({0.25, 0.5}, {0.45, 0.7});
  const ProbInterval p = interval_from_enclosure(point_enclosure(mu), noise, target);
  const double exact =
      erf_mass(0.25, 0.45, 0.3, 0.05) * erf_mass(0.5, 0.7, 0.6, 0.05);
  CHECK(p.lo == doctest::Approx(exact).epsilon(1e-12));
  CHECK(p.hi == doctest::Approx(exact).epsilon(1e-12));
  CHECK(p.lo <= p.hi);
}

TEST_CASE("deep interior target captures all mass") {
  CellEnclosure enc;
  enc.mean_box = make_box({0.45}, {0.55});
  enc.epsilon = Vec::Zero(1);
  enc.delta = 0.0;
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.01));
  const ProbInterval p = interval_from_enclosure(enc, noise, make_box({0.0}, {1.0}));
  CHECK(p.lo >= 1.0 - 1e-12);
  CHECK(p.hi == doctest::Approx(1.0));
}

TEST_CASE("far separated target gets at most the residual mass") {
  CellEnclosure enc;
  enc.mean_box = make_box({0.5}, {0.6});
  enc.epsilon = Vec::Zero(1);
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.01));
  const Box far_target = make_box({2.0}, {3.0});  // 140 sigma away

  enc.delta = 0.0;
  ProbInterval p = interval_from_enclosure(enc, noise, far_target);
  CHECK(p.hi <= 1e-9);
  CHECK(p.lo == 0.0);

  enc.delta = 0.05;
  p = interval_from_enclosure(enc, noise, far_target);
  CHECK(p.hi <= 0.05 + 1e-9);
}

TEST_CASE("residual mass scales the bounds") {
  Vec mu(1);
  mu << 0.5;
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.1));
  const Box target = make_box({0.4}, {0.7});
  const double mass = erf_mass(0.4, 0.7, 0.5, 0.1);

  CellEnclosure enc = point_enclosure(mu);
  enc.delta = 0.05;
  const ProbInterval p = interval_from_enclosure(enc, noise, target);
  CHECK(p.lo == doctest::Approx(0.95 * mass).epsilon(1e-12));
  CHECK(p.hi == doctest::Approx(std::min(1.0, mass + 0.05)).epsilon(1e-12));
}

TEST_CASE("learning error widens the interval") {
  Vec mu(2);
  mu << 0.4, 0.5;
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.05));
  const Box target = make_box({0.3, 0.4}, {0.6, 0.7});

  CellEnclosure exact = point_enclosure(mu);
  CellEnclosure fuzzy = point_enclosure(mu);
  fuzzy.epsilon = Vec::Constant(2, 0.02);

  const ProbInterval pe = interval_from_enclosure(exact, noise, target);
  const ProbInterval pf = interval_from_enclosure(fuzzy, noise, target);
  CHECK(pf.lo <= pe.lo + 1e-15);
  CHECK(pf.hi >= pe.hi - 1e-15);
  CHECK(pf.lo < pe.lo);  // strictly wider here
  CHECK(pf.hi > pe.hi);
}

TEST_CASE("interval is monotone in the target") {
  CellEnclosure enc;
  enc.mean_box = make_box({0.4, 0.4}, {0.6, 0.6});
  enc.epsilon = Vec::Constant(2, 0.01);
  enc.delta = 0.01;
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.1));

  const Box small = make_box({0.35, 0.35}, {0.55, 0.55});
  const Box large = make_box({0.2, 0.2}, {0.8, 0.8});
  const ProbInterval ps = interval_from_enclosure(enc, noise, small);
  const ProbInterval pl = interval_from_enclosure(enc, noise, large);
  CHECK(pl.lo >= ps.lo - 1e-15);
  CHECK(pl.hi >= ps.hi - 1e-15);
}

TEST_CASE("unsafe interval complements the safe interval") {
  CellEnclosure enc;
  enc.mean_box = make_box({0.3, 0.55}, {0.4, 0.65});
  enc.epsilon = Vec::Constant(2, 0.02);
  enc.delta = 0.01;
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.05));
  const Box safe = make_box({0.0, 0.0}, {1.0, 1.0});

  const ProbInterval stay = interval_from_enclosure(enc, noise, safe);
  const ProbInterval leave = unsafe_from_enclosure(enc, noise, safe);
  CHECK(leave.lo == doctest::Approx(std::max(0.0, 1.0 - stay.hi)).epsilon(1e-12));
  CHECK(leave.hi == doctest::Approx(std::min(1.0, 1.0 - stay.lo)).epsilon(1e-12));
}

TEST_CASE("unsafe mass for a deeply interior cell is tiny") {
  CellEnclosure enc;
  enc.mean_box = make_box({0.45, 0.45}, {0.55, 0.55});
  enc.epsilon = Vec::Zero(2);
  enc.delta = 0.0;
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.01));
  const Box safe = make_box({0.0, 0.0}, {1.0, 1.0});
  ProbInterval leave = unsafe_from_enclosure(enc, noise, safe);
  CHECK(leave.hi <= 1e-9);

  enc.delta = 0.05;
  leave = unsafe_from_enclosure(enc, noise, safe);
  CHECK(leave.hi <= 0.05 + 1e-9);
}

TEST_CASE("certain exit when the image misses the safe set") {
  CellEnclosure enc;
  enc.mean_box = make_box({2.0}, {2.1});
  enc.epsilon = Vec::Zero(1);
  enc.delta = 0.0;
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.001));
  const ProbInterval leave = unsafe_from_enclosure(enc, noise, make_box({0.0}, {1.0}));
  CHECK(leave.lo >= 1.0 - 1e-12);
  CHECK(leave.hi == doctest::Approx(1.0));
}

TEST_CASE("absorbing one-cell system under known dynamics") {
  Mat A(1, 1), B(1, 1);
  A << 0.0;
  B << 1.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.45}, {0.55}));
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.01));
  const Partition part = make_partition(make_box({0.0}, {1.0}), make_box({0.0}, {1.0}),
                                        Vec::Constant(1, 1.0), sys.control_box, {1});
  const TransitionMatrix matrix = build_matrix(known_enclosure(sys), noise, part);
  REQUIRE(matrix.rows.size() == 1);
  const TransitionRow& row = matrix.row(0, 0);
  REQUIRE(row.p.size() == 2);
  CHECK(row.p[0].lo >= 1.0 - 1e-12);
  CHECK(row.p[0].hi == doctest::Approx(1.0));
  CHECK(row.p[1].hi <= 1e-12);
}

TEST_CASE("known linear matrix rows are feasible and sound") {
  Mat A(2, 2);
  A << 0.5, 0.0, 0.0, 0.5;
  Mat B(2, 1);
  B << 1.0, 1.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.0}, {0.5}));
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.01));
  const Partition part =
      make_partition(make_box({0.0, 0.0}, {1.0, 1.0}), make_box({0.4, 0.4}, {0.5, 0.5}),
                     Vec::Constant(2, 0.25), sys.control_box, {2});
  const TransitionMatrix matrix = build_matrix(known_enclosure(sys), noise, part);

  REQUIRE(matrix.num_states == 16);
  REQUIRE(matrix.num_controls == 2);
  REQUIRE(matrix.rows.size() == 32);
  for (const TransitionRow& row : matrix.rows) {
    REQUIRE(row.p.size() == 17);
    double lo_sum = 0.0, hi_sum = 0.0;
    for (const ProbInterval& p : row.p) {
      CHECK(p.lo >= 0.0);
      CHECK(p.hi <= 1.0);
      CHECK(p.lo <= p.hi + 1e-15);
      lo_sum += p.lo;
      hi_sum += p.hi;
    }
    CHECK(lo_sum <= 1.0 + 1e-9);
    CHECK(hi_sum >= 1.0 - 1e-9);
  }
}

TEST_CASE("known bounds contain the exact kernel across each cell") {
  Mat A(2, 2);
  A << 0.5, 0.0, 0.0, 0.5;
  Mat B(2, 1);
  B << 1.0, 1.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.0}, {0.5}));
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.01));
  const Partition part =
      make_partition(make_box({0.0, 0.0}, {1.0, 1.0}), make_box({0.4, 0.4}, {0.5, 0.5}),
                     Vec::Constant(2, 0.25), sys.control_box, {2});
  const TransitionMatrix matrix = build_matrix(known_enclosure(sys), noise, part);

  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int i = rng.index(part.num_state_cells());
    const int l = rng.index(part.num_control_cells());
    const int j = rng.index(part.num_state_cells());
    const Box joint = part.joint_cell(i, l);
    const TransitionRow& row = matrix.row(i, l);
    for (int k = 0; k < 20; ++k) {
      const Vec z = rng.uniform_in(joint);
      const Vec fx = eval_dynamics(sys, z.head(2), z.tail(1));
      const Box& target = part.state_cells[j];
      double exact = 1.0;
      for (int d = 0; d < 2; ++d) {
        exact *= gaussian_mass(target.lower[d], target.upper[d], fx[d], 0.01);
      }
      CHECK(exact >= row.p[j].lo - 1e-12);
      CHECK(exact <= row.p[j].hi + 1e-12);
    }
  }
}

TEST_CASE("gp enclosure bounds contain the posterior mean kernel") {
  Mat A(2, 2);
  A << 0.5, 0.0, 0.0, 0.5;
  Mat B(2, 1);
  B << 1.0, 1.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.0}, {0.5}));
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.01));
  const Box region = product_box(make_box({0.0, 0.0}, {1.0, 1.0}), sys.control_box);
  const Dataset data = generate_dataset(sys, noise, region, 80, 17);

  KernelConfig kernel;
  kernel.signal_variance = 0.5;
  kernel.lengthscales = Vec::Constant(3, 1.5);
  kernel.observation_noise_variance = 1e-4;
  const GPModel model = fit(data, kernel);

  ErrorBoundConfig err;
  err.delta = 1e-4;
  err.rkhs_norm_bound = Vec::Constant(2, 1.0);
  err.information_gain = 2.0;

  const Partition part =
      make_partition(make_box({0.0, 0.0}, {1.0, 1.0}), make_box({0.4, 0.4}, {0.5, 0.5}),
                     Vec::Constant(2, 0.25), sys.control_box, {2});

  Rng rng(55);
  for (int trial = 0; trial < 25; ++trial) {
    const int i = rng.index(part.num_state_cells());
    const int l = rng.index(part.num_control_cells());
    const int j = rng.index(part.num_state_cells());
    const Box joint = part.joint_cell(i, l);
    const Box& target = part.state_cells[j];
    const ProbInterval p = transition_interval(model, err, noise, joint, target);
    REQUIRE(p.lo <= p.hi + 1e-15);
    for (int k = 0; k < 20; ++k) {
      const Vec z = rng.uniform_in(joint);
      const Vec mu = posterior_at(model, z).mean;
      double exact = 1.0;
      for (int d = 0; d < 2; ++d) {
        exact *= gaussian_mass(target.lower[d], target.upper[d], mu[d], 0.01);
      }
      CHECK(exact >= p.lo - 1e-12);
      CHECK(exact <= p.hi + 1e-12);
    }
  }
}

TEST_CASE("post image adds the uncertainty box to the mean enclosure") {
  Mat A(1, 1), B(1, 1);
  A << 0.5;
  B << 1.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.0}, {0.5}));
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.05));
  const Box region = product_box(make_box({0.0}, {1.0}), sys.control_box);
  const Dataset data = generate_dataset(sys, noise, region, 40, 3);
  KernelConfig kernel;
  kernel.signal_variance = 1.0;
  kernel.lengthscales = Vec::Constant(2, 1.0);
  kernel.observation_noise_variance = 1e-4;
  const GPModel model = fit(data, kernel);

  const Box cell = make_box({0.2, 0.1}, {0.4, 0.2});
  const RegionBounds rb = region_bounds(model, cell);

  const Box zero = make_box({0.0}, {0.0});
  const Box shifted = post_image(model, cell, make_box({-0.05}, {0.05}));
  const Box plain = post_image(model, cell, zero);
  CHECK(plain.lower[0] == doctest::Approx(rb.mean_lower[0]).epsilon(1e-12));
  CHECK(plain.upper[0] == doctest::Approx(rb.mean_upper[0]).epsilon(1e-12));
  CHECK(shifted.lower[0] == doctest::Approx(rb.mean_lower[0] - 0.05).epsilon(1e-12));
  CHECK(shifted.upper[0] == doctest::Approx(rb.mean_upper[0] + 0.05).epsilon(1e-12));
}

TEST_CASE("matrix json round-trips") {
  Mat A(1, 1), B(1, 1);
  A << 0.5;
  B << 1.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.0}, {0.5}));
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.02));
  const Partition part = make_partition(make_box({0.0}, {1.0}), make_box({0.2}, {0.4}),
                                        Vec::Constant(1, 0.25), sys.control_box, {2});
  const TransitionMatrix matrix = build_matrix(known_enclosure(sys), noise, part);
  const TransitionMatrix loaded = matrix_from_json(matrix_to_json(matrix));

  REQUIRE(loaded.num_states == matrix.num_states);
  REQUIRE(loaded.num_controls == matrix.num_controls);
  REQUIRE(loaded.rows.size() == matrix.rows.size());
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    CHECK(loaded.rows[r].state == matrix.rows[r].state);
    CHECK(loaded.rows[r].control == matrix.rows[r].control);
    REQUIRE(loaded.rows[r].p.size() == matrix.rows[r].p.size());
    for (size_t j = 0; j < matrix.rows[r].p.size(); ++j) {
      CHECK(loaded.rows[r].p[j].lo == matrix.rows[r].p[j].lo);
      CHECK(loaded.rows[r].p[j].hi == matrix.rows[r].p[j].hi);
    }
  }
}

TEST_CASE("inconsistent enclosures are rejected") {
  // a negative residual mass is impossible; the row sum check must fire
  Mat A(1, 1), B(1, 1);
  A << 0.0;
  B << 1.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.45}, {0.55}));
  const NoiseModel noise = make_noise(Vec::Constant(1, 0.01));
  const Partition part = make_partition(make_box({0.0}, {1.0}), make_box({0.0}, {1.0}),
                                        Vec::Constant(1, 0.5), sys.control_box, {1});
  const EnclosureFn bad = [&sys](const Box& joint) {
    CellEnclosure enc;
    enc.mean_box = dynamics_range(sys, joint);
    enc.epsilon = Vec::Zero(1);
    enc.delta = -1.0;
    return enc;
  };
  CHECK_THROWS_AS(build_matrix(bad, noise, part), std::runtime_error);
}

}  // TEST_SUITE
