#include "sbf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sbf {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class KeyValues {
 public:
  explicit KeyValues(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open config file " + path.string());
    std::string line, section;
    int lineno = 0;
    while (std::getline(f, line)) {
      ++lineno;
      bool quoted = false;
      for (size_t c = 0; c < line.size(); ++c) {
        if (line[c] == '"') quoted = !quoted;
        if (line[c] == '#' && !quoted) {
          line.resize(c);
          break;
        }
      }
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          throw ParseError(path.string() + ":" + std::to_string(lineno) + ": malformed section");
        }
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      }
      if (key.empty()) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": empty key");
      }
      values_[section.empty() ? key : section + "." + key] = value;
    }
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string raw(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ParseError("missing required config key '" + key + "'");
    consumed_.insert(key);
    return it->second;
  }

  double number(const std::string& key) {
    const std::string v = raw(key);
    char* end = nullptr;
    const double out = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || trim(end)[0] != '\0') {
      throw ParseError("config key '" + key + "': expected a number, got '" + v + "'");
    }
    return out;
  }

  long integer(const std::string& key) {
    const double v = number(key);
    const long out = static_cast<long>(v);
    if (static_cast<double>(out) != v) {
      throw ParseError("config key '" + key + "': expected an integer");
    }
    return out;
  }

  bool boolean(const std::string& key) {
    const std::string v = raw(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ParseError("config key '" + key + "': expected true or false");
  }

  Vec vector(const std::string& key) {
    const std::string v = raw(key);
    std::istringstream in(v);
    std::vector<double> vals;
    double x;
    while (in >> x) vals.push_back(x);
    if (!in.eof() || vals.empty()) {
      throw ParseError("config key '" + key + "': expected whitespace-separated numbers");
    }
    Vec out(static_cast<long>(vals.size()));
    for (size_t d = 0; d < vals.size(); ++d) out[d] = vals[d];
    return out;
  }

  Mat matrix(const std::string& key) {
    const std::string v = raw(key);
    std::vector<std::vector<double>> rows;
    std::istringstream in(v);
    std::string row_text;
    while (std::getline(in, row_text, ';')) {
      std::istringstream row(row_text);
      std::vector<double> vals;
      double x;
      while (row >> x) vals.push_back(x);
      if (!row.eof() || vals.empty()) {
        throw ParseError("config key '" + key + "': malformed matrix row '" + row_text + "'");
      }
      if (!rows.empty() && rows.front().size() != vals.size()) {
        throw ParseError("config key '" + key + "': ragged matrix rows");
      }
      rows.push_back(vals);
    }
    if (rows.empty()) throw ParseError("config key '" + key + "': empty matrix");
    Mat out(static_cast<long>(rows.size()), static_cast<long>(rows.front().size()));
    for (size_t r = 0; r < rows.size(); ++r) {
      for (size_t c = 0; c < rows[r].size(); ++c) out(r, c) = rows[r][c];
    }
    return out;
  }

  void check_all_consumed() const {
    for (const auto& [key, value] : values_) {
      if (!consumed_.count(key)) throw ParseError("unknown config key '" + key + "'");
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

Box box_from(KeyValues& kv, const std::string& lower_key, const std::string& upper_key) {
  Box box;
  box.lower = kv.vector(lower_key);
  box.upper = kv.vector(upper_key);
  if (box.lower.size() != box.upper.size()) {
    throw ParseError("config keys '" + lower_key + "' and '" + upper_key +
                     "' have mismatched lengths");
  }
  for (long d = 0; d < box.dim(); ++d) {
    if (box.lower[d] > box.upper[d]) {
      throw ParseError("config key '" + lower_key + "': lower bound exceeds upper bound");
    }
  }
  return box;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  KeyValues kv(path);
  RunConfig cfg;

  const std::string kind = kv.raw("system.kind");
  if (kind == "linear") {
    const Mat A = kv.matrix("system.A");
    const Mat B = kv.matrix("system.B");
    const Box control = box_from(kv, "system.control_lower", "system.control_upper");
    cfg.system = SystemModel::linear(A, B, control);
  } else if (kind == "dubins") {
    cfg.system = SystemModel::dubins();
  } else {
    throw ParseError("config key 'system.kind': expected 'linear' or 'dubins'");
  }
  cfg.known_system = kv.has("system.known") ? kv.boolean("system.known") : false;

  const Vec sigma = kv.vector("noise.sigma");
  if (sigma.size() != cfg.system.n) {
    throw ParseError("config key 'noise.sigma': expected " + std::to_string(cfg.system.n) +
                     " entries");
  }
  cfg.noise = make_noise(sigma);

  cfg.safe_set = box_from(kv, "geometry.safe_lower", "geometry.safe_upper");
  cfg.initial_set = box_from(kv, "geometry.initial_lower", "geometry.initial_upper");
  cfg.state_cell_width = kv.vector("geometry.state_cell_width");
  if (cfg.safe_set.dim() != cfg.system.n || cfg.initial_set.dim() != cfg.system.n ||
      cfg.state_cell_width.size() != cfg.system.n) {
    throw ParseError("geometry dimensions must match the system's state dimension");
  }
  if (!cfg.safe_set.contains(cfg.initial_set.lower, 1e-12) ||
      !cfg.safe_set.contains(cfg.initial_set.upper, 1e-12)) {
    throw ParseError("config key 'geometry.initial_lower': initial set must lie inside the safe set");
  }
  const Vec control_cells = kv.vector("geometry.control_cells");
  if (control_cells.size() != cfg.system.m) {
    throw ParseError("config key 'geometry.control_cells': expected " +
                     std::to_string(cfg.system.m) + " entries");
  }
  for (long d = 0; d < control_cells.size(); ++d) {
    const int c = static_cast<int>(control_cells[d]);
    if (c < 1 || static_cast<double>(c) != control_cells[d]) {
      throw ParseError("config key 'geometry.control_cells': entries must be positive integers");
    }
    cfg.control_cells_per_dim.push_back(c);
  }

  if (!cfg.known_system) {
    cfg.kernel.signal_variance = kv.number("gp.signal_variance");
    cfg.kernel.lengthscales = kv.vector("gp.lengthscales");
    cfg.kernel.observation_noise_variance = kv.number("gp.noise_variance");
    if (cfg.kernel.lengthscales.size() != cfg.system.n + cfg.system.m) {
      throw ParseError("config key 'gp.lengthscales': expected " +
                       std::to_string(cfg.system.n + cfg.system.m) + " entries");
    }
    cfg.error.delta = kv.number("error.delta");
    cfg.error.rkhs_norm_bound = kv.vector("error.rkhs_norm_bound");
    if (kv.has("error.information_gain")) {
      cfg.error.information_gain = kv.number("error.information_gain");
    }
    cfg.data_count = kv.integer("data.count");
    if (cfg.data_count < 1) throw ParseError("config key 'data.count': must be >= 1");
  }

  cfg.horizon = static_cast<int>(kv.integer("run.horizon"));
  if (cfg.horizon < 1) throw ParseError("config key 'run.horizon': N must be >= 1");
  cfg.p = kv.number("run.p");
  if (!(cfg.p > 0.0) || !(cfg.p < 1.0)) throw ParseError("p must lie in (0,1)");
  cfg.seed = static_cast<uint64_t>(kv.integer("run.seed"));
  cfg.trials = kv.integer("run.trials");
  if (cfg.trials < 1) throw ParseError("config key 'run.trials': must be >= 1");
  cfg.adversarial_start = kv.has("run.adversarial_start") ? kv.vector("run.adversarial_start")
                                                          : Vec(cfg.initial_set.center());
  if (cfg.adversarial_start.size() != cfg.system.n) {
    throw ParseError("config key 'run.adversarial_start': dimension mismatch");
  }
  if (kv.has("run.out_dir")) cfg.out_dir = kv.raw("run.out_dir");

  kv.check_all_consumed();
  return cfg;
}

Partition make_run_partition(const RunConfig& cfg) {
  return make_partition(cfg.safe_set, cfg.initial_set, cfg.state_cell_width,
                        cfg.system.control_box, cfg.control_cells_per_dim);
}

}  // namespace sbf
