#include "sbf/systems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sbf/rng.hpp"

namespace sbf {

SystemModel SystemModel::linear(const Mat& A, const Mat& B, const Box& control_box) {
  if (A.rows() != A.cols()) throw std::invalid_argument("A must be square");
  if (B.rows() != A.rows()) throw std::invalid_argument("B row count must match A");
  if (control_box.dim() != B.cols()) throw std::invalid_argument("control box dimension mismatch");
  SystemModel sys;
  sys.kind = SystemKind::Linear;
  sys.n = static_cast<int>(A.rows());
  sys.m = static_cast<int>(B.cols());
  sys.A = A;
  sys.B = B;
  sys.control_box = control_box;
  return sys;
}

SystemModel SystemModel::dubins() {
  SystemModel sys;
  sys.kind = SystemKind::Dubins;
  sys.n = 2;
  sys.m = 1;
  sys.speed = 0.2;
  sys.control_box = make_box({-M_PI}, {M_PI});
  return sys;
}

NoiseModel make_noise(const Vec& sigma) {
  for (long d = 0; d < sigma.size(); ++d) {
    if (!(sigma[d] > 0.0)) throw std::invalid_argument("noise sigma must be positive");
  }
  return NoiseModel{sigma};
}

Vec eval_dynamics(const SystemModel& sys, const Vec& x, const Vec& u) {
  if (x.size() != sys.n) throw std::invalid_argument("state dimension mismatch");
  if (u.size() != sys.m) throw std::invalid_argument("control dimension mismatch");
  if (!sys.control_box.contains(u)) throw std::invalid_argument("control outside control box");
  if (sys.kind == SystemKind::Linear) return sys.A * x + sys.B * u;
  Vec out(2);
  out[0] = x[0] + sys.speed * std::cos(u[0]);
  out[1] = x[1] + sys.speed * std::sin(u[0]);
  return out;
}

Vec step(const SystemModel& sys, const Vec& x, const Vec& u, const Vec& noise_draw) {
  return eval_dynamics(sys, x, u) + noise_draw;
}

namespace {

// range of cos over [a, b] within [-pi, pi]
void cos_range(double a, double b, double& lo, double& hi) {
  lo = std::min(std::cos(a), std::cos(b));
  hi = std::max(std::cos(a), std::cos(b));
  if (a <= 0.0 && 0.0 <= b) hi = 1.0;
  // cos attains -1 at the interval ends +-pi
  if (a <= -M_PI + 1e-15 || b >= M_PI - 1e-15) lo = -1.0;
}

void sin_range(double a, double b, double& lo, double& hi) {
  lo = std::min(std::sin(a), std::sin(b));
  hi = std::max(std::sin(a), std::sin(b));
  if (a <= M_PI / 2 && M_PI / 2 <= b) hi = 1.0;
  if (a <= -M_PI / 2 && -M_PI / 2 <= b) lo = -1.0;
}

}  // namespace

Box dynamics_range(const SystemModel& sys, const Box& joint_cell) {
  if (joint_cell.dim() != sys.n + sys.m) throw std::invalid_argument("joint cell dimension mismatch");
  Box out;
  out.lower.resize(sys.n);
  out.upper.resize(sys.n);
  if (sys.kind == SystemKind::Linear) {
    // interval matrix-vector product, sign by sign
    for (int r = 0; r < sys.n; ++r) {
      double lo = 0.0, hi = 0.0;
      for (int c = 0; c < sys.n; ++c) {
        const double a = sys.A(r, c);
        if (a >= 0.0) {
          lo += a * joint_cell.lower[c];
          hi += a * joint_cell.upper[c];
        } else {
          lo += a * joint_cell.upper[c];
          hi += a * joint_cell.lower[c];
        }
      }
      for (int c = 0; c < sys.m; ++c) {
        const double b = sys.B(r, c);
        const double ul = joint_cell.lower[sys.n + c];
        const double uh = joint_cell.upper[sys.n + c];
        if (b >= 0.0) {
          lo += b * ul;
          hi += b * uh;
        } else {
          lo += b * uh;
          hi += b * ul;
        }
      }
      out.lower[r] = lo;
      out.upper[r] = hi;
    }
    return out;
  }
  const double a = joint_cell.lower[2];
  const double b = joint_cell.upper[2];
  double clo, chi, slo, shi;
  cos_range(a, b, clo, chi);
  sin_range(a, b, slo, shi);
  out.lower[0] = joint_cell.lower[0] + sys.speed * clo;
  out.upper[0] = joint_cell.upper[0] + sys.speed * chi;
  out.lower[1] = joint_cell.lower[1] + sys.speed * slo;
  out.upper[1] = joint_cell.upper[1] + sys.speed * shi;
  return out;
}

Dataset generate_dataset(const SystemModel& sys, const NoiseModel& noise,
                         const Box& sampling_region, long M, uint64_t seed) {
  if (M < 1) throw std::invalid_argument("dataset size must be >= 1");
  if (sampling_region.dim() != sys.n + sys.m) {
    throw std::invalid_argument("sampling region dimension mismatch");
  }
  Dataset data;
  data.n = sys.n;
  data.m = sys.m;
  data.inputs.resize(M, sys.n + sys.m);
  data.outputs.resize(M, sys.n);
  Rng rng(seed);
  for (long r = 0; r < M; ++r) {
    const Vec z = rng.uniform_in(sampling_region);
    const Vec x = z.head(sys.n);
    const Vec u = z.tail(sys.m);
    Vec w(sys.n);
    for (int d = 0; d < sys.n; ++d) w[d] = noise.sigma[d] * rng.gaussian();
    data.inputs.row(r) = z.transpose();
    data.outputs.row(r) = step(sys, x, u, w).transpose();
  }
  return data;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << "# n=" << data.n << " m=" << data.m << "\n";
  std::string line;
  for (long r = 0; r < data.size(); ++r) {
    line.clear();
    for (long c = 0; c < data.inputs.cols(); ++c) {
      if (c) line.push_back(',');
      append_double(line, data.inputs(r, c));
    }
    for (long c = 0; c < data.outputs.cols(); ++c) {
      line.push_back(',');
      append_double(line, data.outputs(r, c));
    }
    f << line << "\n";
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open dataset file " + path.string());
  std::string header;
  if (!std::getline(f, header)) throw ParseError(path.string() + ": no records");
  int n = -1, m = -1;
  if (std::sscanf(header.c_str(), "# n=%d m=%d", &n, &m) != 2 || n < 1 || m < 1) {
    throw ParseError(path.string() + ":1: malformed header, expected '# n=<n> m=<m>'");
  }
  std::vector<double> values;
  std::string line;
  long rows = 0;
  long lineno = 1;
  const int cols = 2 * n + m;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    int got = 0;
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
      double v;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{}) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad number");
      }
      values.push_back(v);
      ++got;
      p = res.ptr;
      if (p < end) {
        if (*p != ',') throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected ','");
        ++p;
      }
    }
    if (got != cols) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(cols) + " fields, got " + std::to_string(got));
    }
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": no records");
  Dataset data;
  data.n = n;
  data.m = m;
  data.inputs.resize(rows, n + m);
  data.outputs.resize(rows, n);
  for (long r = 0; r < rows; ++r) {
    const double* row = values.data() + r * cols;
    for (int c = 0; c < n + m; ++c) data.inputs(r, c) = row[c];
    for (int c = 0; c < n; ++c) data.outputs(r, c) = row[n + m + c];
  }
  return data;
}

}  // namespace sbf
