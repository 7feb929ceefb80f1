#include "sbf/pipeline.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "sbf/artifacts.hpp"
#include "sbf/validation.hpp"

namespace sbf {

namespace {

GPModel fit_from_artifacts(const RunConfig& cfg, const StagePaths& paths) {
  require_artifact(paths.dataset, "gen-data");
  const Dataset data = load_dataset(paths.dataset);
  if (data.n != cfg.system.n || data.m != cfg.system.m) {
    throw std::runtime_error("dataset dimensions do not match the configured system");
  }
  return fit(data, cfg.kernel);
}

PermissibleStrategySet load_set(const RunConfig& cfg, const StagePaths& paths) {
  require_artifact(paths.permissible_set, "prune");
  const StoredPermissibleSet stored = permissible_set_from_json(read_text_file(paths.permissible_set));
  PermissibleStrategySet set;
  set.partition = make_run_partition(cfg);
  if (static_cast<int>(stored.retained.size()) != set.partition.num_state_cells()) {
    throw std::runtime_error("stored permissible set does not match the configured partition");
  }
  set.retained = stored.retained;
  set.certificate = stored.certificate;
  set.p = stored.p;
  set.horizon = stored.horizon;
  return set;
}

}  // namespace

void stage_gen_data(const RunConfig& cfg) {
  const StagePaths paths = StagePaths::in(cfg.out_dir);
  std::filesystem::create_directories(paths.dir);
  if (cfg.known_system) {
    std::cout << "[gen-data] known system, no dataset needed\n";
    return;
  }
  const Box region = product_box(cfg.safe_set, cfg.system.control_box);
  const Dataset data = generate_dataset(cfg.system, cfg.noise, region, cfg.data_count,
                                        substream_seed(cfg.seed, "data"));
  save_dataset(data, paths.dataset);
  std::cout << "[gen-data] wrote " << paths.dataset.string() << " (" << data.size()
            << " rows)\n";
}

void stage_fit_gp(const RunConfig& cfg) {
  const StagePaths paths = StagePaths::in(cfg.out_dir);
  std::filesystem::create_directories(paths.dir);
  if (cfg.known_system) {
    std::cout << "[fit-gp] known system, regression skipped\n";
    return;
  }
  const GPModel model = fit_from_artifacts(cfg, paths);
  const Vec alpha = alpha_scale(model, cfg.error);
  std::ostringstream out;
  out.precision(17);
  out << "{\"training_points\":" << model.size() << ",\"input_dim\":" << model.Z.cols()
      << ",\"output_dim\":" << model.n << ",\"effective_noise\":" << model.effective_noise
      << ",\"information_gain\":" << information_gain(model) << ",\"alpha\":[";
  for (long i = 0; i < alpha.size(); ++i) {
    if (i) out << ",";
    out << alpha[i];
  }
  out << "]}";
  write_text_file(paths.gp_summary, out.str());
  std::cout << "[fit-gp] wrote " << paths.gp_summary.string() << " (gamma "
            << (cfg.error.information_gain ? *cfg.error.information_gain
                                           : information_gain(model))
            << ")\n";
}

void stage_bounds(const RunConfig& cfg) {
  const StagePaths paths = StagePaths::in(cfg.out_dir);
  std::filesystem::create_directories(paths.dir);
  const Partition partition = make_run_partition(cfg);
  TransitionMatrix matrix;
  if (cfg.known_system) {
    matrix = build_matrix(known_enclosure(cfg.system), cfg.noise, partition);
  } else {
    require_artifact(paths.gp_summary, "fit-gp");
    const GPModel model = fit_from_artifacts(cfg, paths);
    matrix = build_matrix(model, cfg.error, cfg.noise, partition);
  }
  write_text_file(paths.bounds, matrix_to_json(matrix));
  std::cout << "[bounds] wrote " << paths.bounds.string() << " (" << matrix.rows.size()
            << " rows)\n";
}

RunStatus stage_prune(const RunConfig& cfg) {
  const StagePaths paths = StagePaths::in(cfg.out_dir);
  std::filesystem::create_directories(paths.dir);
  require_artifact(paths.bounds, "bounds");
  const TransitionMatrix matrix = matrix_from_json(read_text_file(paths.bounds));
  const Partition partition = make_run_partition(cfg);
  const PruneResult result = synthesize_permissible_set(matrix, partition, cfg.horizon, cfg.p);
  if (!result.feasible) {
    std::ostringstream out;
    out.precision(17);
    out << "{\"feasible\":false,\"p\":" << cfg.p << ",\"N\":" << cfg.horizon
        << ",\"removal_log\":[";
    for (size_t k = 0; k < result.removal_log.size(); ++k) {
      const RemovalEvent& ev = result.removal_log[k];
      if (k) out << ",";
      out << "{\"iteration\":" << ev.iteration << ",\"i\":" << ev.state << ",\"l\":"
          << ev.control << ",\"beta_il\":" << ev.beta_il << ",\"objective\":" << ev.objective
          << "}";
    }
    out << "]}";
    write_text_file(paths.infeasible, out.str());
    std::cerr << "[prune] infeasible: a state cell lost its last control after "
              << result.removal_log.size() << " removals (see " << paths.infeasible.string()
              << ")\n";
    return RunStatus::Infeasible;
  }
  write_text_file(paths.certificate, certificate_to_json(result.set.certificate));
  write_text_file(paths.permissible_set, permissible_set_to_json(result.set));
  std::cout << "[prune] wrote " << paths.certificate.string() << " and "
            << paths.permissible_set.string() << " (bound "
            << result.set.certificate.safety_lower_bound << ", retained "
            << result.set.retained_fraction() << ", removals " << result.removal_log.size()
            << ")\n";
  return RunStatus::Success;
}

RunStatus stage_validate(const RunConfig& cfg) {
  const StagePaths paths = StagePaths::in(cfg.out_dir);
  std::filesystem::create_directories(paths.dir);
  const PermissibleStrategySet set = load_set(cfg, paths);
  std::vector<Trajectory> trajectories;
  ValidationReport report =
      monte_carlo(cfg.system, cfg.noise, set, cfg.initial_set, cfg.horizon, cfg.trials,
                  substream_seed(cfg.seed, "validation"), &trajectories);
  Trajectory full =
      adversarial_rollout(cfg.system, cfg.noise, set.partition, full_control_set(set.partition),
                          cfg.adversarial_start, cfg.horizon,
                          substream_seed(cfg.seed, "adversarial-full"));
  Trajectory permissible =
      adversarial_rollout(cfg.system, cfg.noise, set.partition, set.retained,
                          cfg.adversarial_start, cfg.horizon,
                          substream_seed(cfg.seed, "adversarial-permissible"));
  report.adversarial_full_set_exited = full.exited;
  report.adversarial_permissible_exited = permissible.exited;
  full.trial = -1;
  permissible.trial = -2;
  trajectories.push_back(std::move(full));
  trajectories.push_back(std::move(permissible));
  write_text_file(paths.validation, report_to_json(report));
  save_trajectories_csv(trajectories, cfg.system.n, cfg.system.m, paths.trajectories);
  std::cout << "[validate] wrote " << paths.validation.string() << " (violations "
            << report.violations << "/" << report.trials << ", adversarial full exit "
            << (report.adversarial_full_set_exited ? "yes" : "no") << ", permissible exit "
            << (report.adversarial_permissible_exited ? "yes" : "no") << ")\n";
  return RunStatus::Success;
}

RunStatus run_all(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const StagePaths paths = StagePaths::in(cfg.out_dir);
  stage_gen_data(cfg);
  stage_fit_gp(cfg);
  stage_bounds(cfg);
  const RunStatus prune_status = stage_prune(cfg);
  if (prune_status == RunStatus::Success) stage_validate(cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream summary;
  if (prune_status == RunStatus::Success) {
    const StoredPermissibleSet stored =
        permissible_set_from_json(read_text_file(paths.permissible_set));
    const nlohmann::json doc = nlohmann::json::parse(read_text_file(paths.permissible_set));
    summary << "safety_lower_bound=" << stored.certificate.safety_lower_bound
            << " retained_fraction=" << doc.at("retained_fraction").get<double>()
            << " wall_time_s=" << wall;
  } else {
    summary << "infeasible=true wall_time_s=" << wall;
  }
  write_text_file(paths.summary, summary.str() + "\n");
  std::cout << summary.str() << "\n";
  return prune_status;
}

}  // namespace sbf
