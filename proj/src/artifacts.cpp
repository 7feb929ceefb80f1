#include "sbf/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sbf {

StagePaths StagePaths::in(const std::filesystem::path& dir) {
  StagePaths p;
  p.dir = dir;
  p.dataset = dir / "dataset.csv";
  p.gp_summary = dir / "gp.json";
  p.bounds = dir / "bounds.json";
  p.certificate = dir / "certificate.json";
  p.permissible_set = dir / "permissible_set.json";
  p.infeasible = dir / "infeasible.json";
  p.validation = dir / "validation.json";
  p.trajectories = dir / "trajectories.csv";
  p.summary = dir / "run_summary.txt";
  return p;
}

void require_artifact(const std::filesystem::path& path, const std::string& producer) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("missing artifact " + path.string() + "; run the '" + producer +
                             "' stage first");
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  out << f.rdbuf();
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
}

uint64_t file_fingerprint(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

TransitionMatrix matrix_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  if (!doc.is_array() || doc.empty()) throw ParseError("transition matrix json must be a nonempty array");
  TransitionMatrix matrix;
  const int K = static_cast<int>(doc.front().at("intervals").size()) - 1;
  if (K < 1 || doc.size() % static_cast<size_t>(K) != 0) {
    throw ParseError("transition matrix json has inconsistent row counts");
  }
  matrix.num_states = K;
  matrix.num_controls = static_cast<int>(doc.size()) / K;
  matrix.rows.reserve(doc.size());
  for (const auto& row_json : doc) {
    TransitionRow row;
    row.state = row_json.at("i").get<int>();
    row.control = row_json.at("l").get<int>();
    for (const auto& pair : row_json.at("intervals")) {
      row.p.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    if (static_cast<int>(row.p.size()) != K + 1) {
      throw ParseError("transition matrix json row has the wrong interval count");
    }
    matrix.rows.push_back(std::move(row));
  }
  for (size_t r = 0; r < matrix.rows.size(); ++r) {
    const int i = static_cast<int>(r) / matrix.num_controls;
    const int l = static_cast<int>(r) % matrix.num_controls;
    if (matrix.rows[r].state != i || matrix.rows[r].control != l) {
      throw ParseError("transition matrix json rows are out of order");
    }
  }
  return matrix;
}

namespace {

BarrierCertificate certificate_from(const nlohmann::json& doc) {
  BarrierCertificate cert;
  cert.eta = doc.at("eta").get<double>();
  cert.beta = doc.at("beta").get<double>();
  cert.horizon = doc.at("N").get<int>();
  cert.safety_lower_bound = doc.at("safety_lower_bound").get<double>();
  const auto& b = doc.at("b");
  cert.b.resize(static_cast<long>(b.size()));
  for (size_t j = 0; j < b.size(); ++j) cert.b[static_cast<long>(j)] = b[j].get<double>();
  for (const auto& entry : doc.at("beta_matrix")) {
    cert.beta_matrix.push_back({entry.at("i").get<int>(), entry.at("l").get<int>(),
                                entry.at("beta_il").get<double>()});
  }
  cert.objective = cert.eta + cert.horizon * cert.beta;
  return cert;
}

}  // namespace

BarrierCertificate certificate_from_json(const std::string& text) {
  return certificate_from(nlohmann::json::parse(text));
}

StoredPermissibleSet permissible_set_from_json(const std::string& text) {
  const nlohmann::json doc = nlohmann::json::parse(text);
  StoredPermissibleSet out;
  out.p = doc.at("p").get<double>();
  out.horizon = doc.at("N").get<int>();
  out.certificate = certificate_from(doc.at("certificate"));
  out.retained.resize(out.certificate.b.size());
  for (const auto& [key, value] : doc.at("retained").items()) {
    const size_t i = std::stoul(key);
    if (i >= out.retained.size()) throw ParseError("retained map index out of range");
    for (const auto& l : value) out.retained[i].push_back(l.get<int>());
  }
  return out;
}

}  // namespace sbf
