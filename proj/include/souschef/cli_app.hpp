#pragma once

#include <string>
#include <vector>

namespace souschef::cli {

// Exit codes, stable across releases:
//   0 success / Completed
//   1 check failed (geom-check residual above threshold)
//   2 usage, config, or input-file errors
//   3 Refused (missing ingredient)
//   4 PlanParseFailed
//   5 CodeParseFailed (including scene validation)
//   6 ExecutionFailed
//   7 GoalNotMet
int run_cli(const std::vector<std::string>& args);

}  // namespace souschef::cli
