#pragma once

#include "sbf/config.hpp"

namespace sbf {

enum class RunStatus { Success = 0, Error = 1, Infeasible = 2 };

void stage_gen_data(const RunConfig& cfg);
void stage_fit_gp(const RunConfig& cfg);
void stage_bounds(const RunConfig& cfg);
RunStatus stage_prune(const RunConfig& cfg);
RunStatus stage_validate(const RunConfig& cfg);

// The five stages in order; validation is skipped when pruning is infeasible.
RunStatus run_all(const RunConfig& cfg);

}  // namespace sbf
