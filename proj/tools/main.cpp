#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sbf/pipeline.hpp"

namespace {

constexpr const char* kStages[] = {"run", "gen-data", "fit-gp", "bounds", "prune", "validate"};

int dispatch(const std::string& stage, const sbf::RunConfig& cfg) {
  if (stage == "gen-data") {
    sbf::stage_gen_data(cfg);
    return 0;
  }
  if (stage == "fit-gp") {
    sbf::stage_fit_gp(cfg);
    return 0;
  }
  if (stage == "bounds") {
    sbf::stage_bounds(cfg);
    return 0;
  }
  if (stage == "prune") return static_cast<int>(sbf::stage_prune(cfg));
  if (stage == "validate") return static_cast<int>(sbf::stage_validate(cfg));
  return static_cast<int>(sbf::run_all(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Learns a stochastic system from sampled transitions, bounds its cell-to-cell "
      "transition probabilities, and prunes the control space down to strategies with a "
      "certified safety probability."};
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string stage_flag;
  std::uint64_t seed = 0;
  double p = 0.0;
  int threads = 0;

  app.add_option("--config", config_path, "Run configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides config)");
  auto* seed_opt = app.add_option("--seed", seed, "Root random seed (overrides config)");
  auto* p_opt =
      app.add_option("--p", p, "Safety probability threshold (overrides config)");
  auto* stage_opt =
      app.add_option("--stage", stage_flag, "Pipeline stage to execute (default: run)")
          ->check(CLI::IsMember(
              {"run", "gen-data", "fit-gp", "bounds", "prune", "validate"}));
  app.add_option("--threads", threads, "Worker threads (accepted for compatibility)");

  CLI::App* subcommands[6];
  const char* descriptions[6] = {
      "All stages in order (default)",
      "Sample transitions from the configured system",
      "Fit the regression model to the dataset",
      "Compute the interval transition matrix",
      "Synthesize the certificate and permissible strategy set",
      "Monte Carlo and adversarial checks of the synthesized set"};
  for (int i = 0; i < 6; ++i) {
    subcommands[i] = app.add_subcommand(kStages[i], descriptions[i]);
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::string stage = "run";
  if (*stage_opt) stage = stage_flag;
  for (int i = 0; i < 6; ++i) {
    if (subcommands[i]->parsed()) stage = kStages[i];
  }

  try {
    sbf::RunConfig cfg = sbf::load_config(config_path);
    if (*out_opt) cfg.out_dir = out_dir;
    if (*seed_opt) cfg.seed = seed;
    if (*p_opt) cfg.p = p;
    if (!(cfg.p > 0.0 && cfg.p < 1.0)) throw sbf::ParseError("p must lie in (0,1)");
    return dispatch(stage, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
