#pragma once

#include <ostream>
#include <string>

#include "switchgrid/cli/run_config.hpp"

namespace switchgrid::cli {

enum ExitStatus : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2 };

/// Each command writes its artifacts into cfg.output_dir, a timing.json
/// with wall-clock seconds, and error.json when it fails. Progress and
/// summaries go to `log`.
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);

/// Dispatches on the subcommand name and maps exceptions to exit statuses.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

}  // namespace switchgrid::cli
