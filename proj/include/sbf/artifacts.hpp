#pragma once

#include <filesystem>
#include <string>

#include "sbf/barrier.hpp"
#include "sbf/pruning.hpp"
#include "sbf/transition.hpp"

namespace sbf {

struct StagePaths {
  std::filesystem::path dir;
  std::filesystem::path dataset;
  std::filesystem::path gp_summary;
  std::filesystem::path bounds;
  std::filesystem::path certificate;
  std::filesystem::path permissible_set;
  std::filesystem::path infeasible;
  std::filesystem::path validation;
  std::filesystem::path trajectories;
  std::filesystem::path summary;

  static StagePaths in(const std::filesystem::path& dir);
};

// Throws with a message naming the producing stage when the file is absent.
void require_artifact(const std::filesystem::path& path, const std::string& producer);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// FNV-1a over the file bytes, for determinism checks.
uint64_t file_fingerprint(const std::filesystem::path& path);

TransitionMatrix matrix_from_json(const std::string& text);
BarrierCertificate certificate_from_json(const std::string& text);

struct StoredPermissibleSet {
  double p = 0.0;
  int horizon = 0;
  std::vector<std::vector<int>> retained;
  BarrierCertificate certificate;
};

StoredPermissibleSet permissible_set_from_json(const std::string& text);

}  // namespace sbf
