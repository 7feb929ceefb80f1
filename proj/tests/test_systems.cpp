#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sbf/rng.hpp"
#include "sbf/systems.hpp"

using namespace sbf;

namespace {

SystemModel benchmark_linear() {
  Mat A(2, 2);
  A << 0.5, 0.0, 0.0, 0.5;
  Mat B(2, 1);
  B << 1.0, 1.0;
  return SystemModel::linear(A, B, make_box({0.0}, {0.5}));
}

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sbf_systems_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("systems") {

TEST_CASE("linear step") {
  const SystemModel sys = benchmark_linear();
  Vec x(2), u(1);
  x << 1.0, 1.0;
  u << 0.2;
  const Vec y = eval_dynamics(sys, x, u);
  CHECK(y[0] == doctest::Approx(0.7));
  CHECK(y[1] == doctest::Approx(0.7));
}

TEST_CASE("dubins step moves by the fixed speed") {
  const SystemModel sys = SystemModel::dubins();
  Vec x(2), u(1);
  x << 0.5, 0.5;

  u << 0.0;
  Vec y = eval_dynamics(sys, x, u);
  CHECK(y[0] == doctest::Approx(0.7));
  CHECK(y[1] == doctest::Approx(0.5));

  u << M_PI / 2.0;
  y = eval_dynamics(sys, x, u);
  CHECK(y[0] == doctest::Approx(0.5));
  CHECK(y[1] == doctest::Approx(0.7));

  for (double heading : {-3.0, -1.2, 0.4, 2.8}) {
    u << heading;
    y = eval_dynamics(sys, x, u);
    CHECK((y - x).norm() == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("controls outside the box are rejected") {
  const SystemModel sys = benchmark_linear();
  Vec x(2), u(1);
  x << 0.0, 0.0;
  u << 0.6;
  CHECK_THROWS_AS(eval_dynamics(sys, x, u), std::invalid_argument);
}

TEST_CASE("step adds the supplied noise draw") {
  const SystemModel sys = benchmark_linear();
  Vec x(2), u(1), w(2);
  x << 1.0, 1.0;
  u << 0.0;
  w << 0.01, -0.02;
  const Vec y = step(sys, x, u, w);
  CHECK(y[0] == doctest::Approx(0.51));
  CHECK(y[1] == doctest::Approx(0.48));
}

TEST_CASE("linear dynamics range handles sign splits") {
  Mat A(1, 1), B(1, 1);
  A << -1.0;
  B << 0.0;
  const SystemModel sys = SystemModel::linear(A, B, make_box({0.0}, {1.0}));
  const Box joint = make_box({1.0, 0.0}, {2.0, 1.0});
  const Box range = dynamics_range(sys, joint);
  CHECK(range.lower[0] == doctest::Approx(-2.0));
  CHECK(range.upper[0] == doctest::Approx(-1.0));
}

TEST_CASE("benchmark linear range") {
  const SystemModel sys = benchmark_linear();
  const Box joint = make_box({0.0, 0.0, 0.0}, {0.2, 0.2, 0.1});
  const Box range = dynamics_range(sys, joint);
  CHECK(range.lower[0] == doctest::Approx(0.0));
  CHECK(range.upper[0] == doctest::Approx(0.2));
  CHECK(range.upper[1] == doctest::Approx(0.2));
}

TEST_CASE("dubins range uses interval trigonometry") {
  const SystemModel sys = SystemModel::dubins();

  // heading spans [pi/4, 3pi/4]: sin has an interior max at pi/2
  Box joint = make_box({0.0, 0.0, M_PI / 4.0}, {0.0, 0.0, 3.0 * M_PI / 4.0});
  Box range = dynamics_range(sys, joint);
  const double c = std::sqrt(0.5);
  CHECK(range.lower[0] == doctest::Approx(-0.2 * c));
  CHECK(range.upper[0] == doctest::Approx(0.2 * c));
  CHECK(range.lower[1] == doctest::Approx(0.2 * c));
  CHECK(range.upper[1] == doctest::Approx(0.2));

  // full heading range covers the whole circle
  joint = make_box({0.5, 0.5, -M_PI}, {0.5, 0.5, M_PI});
  range = dynamics_range(sys, joint);
  CHECK(range.lower[0] == doctest::Approx(0.3));
  CHECK(range.upper[0] == doctest::Approx(0.7));
  CHECK(range.lower[1] == doctest::Approx(0.3));
  CHECK(range.upper[1] == doctest::Approx(0.7));
}

TEST_CASE("dynamics range encloses sampled evaluations") {
  const SystemModel sys = SystemModel::dubins();
  const Box joint = make_box({0.1, 0.2, -1.0}, {0.3, 0.4, 2.5});
  const Box range = dynamics_range(sys, joint);
  Rng rng(7);
  for (int k = 0; k < 500; ++k) {
    const Vec z = rng.uniform_in(joint);
    const Vec x = z.head(2);
    const Vec u = z.tail(1);
    CHECK(range.contains(eval_dynamics(sys, x, u), 1e-12));
  }
}

TEST_CASE("dataset generation is seed deterministic") {
  const SystemModel sys = benchmark_linear();
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.01));
  const Box region = product_box(make_box({0.0, 0.0}, {1.0, 1.0}), sys.control_box);

  const Dataset a = generate_dataset(sys, noise, region, 50, 42);
  const Dataset b = generate_dataset(sys, noise, region, 50, 42);
  const Dataset c = generate_dataset(sys, noise, region, 50, 43);
  REQUIRE(a.size() == 50);
  CHECK(a.inputs == b.inputs);
  CHECK(a.outputs == b.outputs);
  CHECK(a.inputs != c.inputs);

  for (long r = 0; r < a.size(); ++r) {
    CHECK(region.contains(a.inputs.row(r).transpose(), 1e-12));
  }
}

TEST_CASE("dataset noise matches the requested scale") {
  const SystemModel sys = benchmark_linear();
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.01));
  const Box region = product_box(make_box({0.0, 0.0}, {1.0, 1.0}), sys.control_box);
  const Dataset data = generate_dataset(sys, noise, region, 2000, 11);

  double sq = 0.0;
  for (long r = 0; r < data.size(); ++r) {
    const Vec x = data.inputs.row(r).head(2).transpose();
    const Vec u = data.inputs.row(r).tail(1).transpose();
    const Vec resid = data.outputs.row(r).transpose() - eval_dynamics(sys, x, u);
    sq += resid.squaredNorm();
  }
  const double sigma_hat = std::sqrt(sq / (2.0 * static_cast<double>(data.size())));
  CHECK(sigma_hat == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("dataset round-trips through disk exactly") {
  const SystemModel sys = benchmark_linear();
  const NoiseModel noise = make_noise(Vec::Constant(2, 0.01));
  const Box region = product_box(make_box({0.0, 0.0}, {1.0, 1.0}), sys.control_box);
  const Dataset data = generate_dataset(sys, noise, region, 25, 5);

  const auto path = temp_file("roundtrip.csv");
  save_dataset(data, path);
  const Dataset loaded = load_dataset(path);
  REQUIRE(loaded.n == 2);
  REQUIRE(loaded.m == 1);
  REQUIRE(loaded.size() == 25);
  CHECK(loaded.inputs == data.inputs);
  CHECK(loaded.outputs == data.outputs);
}

TEST_CASE("dataset loader reports malformed input") {
  const auto path = temp_file("broken.csv");
  {
    std::ofstream f(path);
    f << "# n=2 m=1\n";
    f << "0.1,0.2,0.3,0.4,0.5\n";
    f << "0.1,0.2,oops,0.4,0.5\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains(":3"), ParseError);

  const auto empty = temp_file("empty.csv");
  {
    std::ofstream f(empty);
    f << "# n=2 m=1\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(empty), doctest::Contains("no records"), ParseError);
}

TEST_CASE("noise model requires positive scales") {
  CHECK_THROWS_AS(make_noise(Vec::Constant(2, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(make_noise(Vec::Constant(2, -0.1)), std::invalid_argument);
}

}  // TEST_SUITE
