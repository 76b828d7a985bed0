#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchgrid/grid/grid.hpp"
#include "switchgrid/model/problem.hpp"
#include "switchgrid/verify/check.hpp"
#include "switchgrid/verify/checks.hpp"

namespace switchgrid::verify {

struct VerifyConfig {
  GridConfig grid{.nx = 100, .ny = 100, .nt = 50};
  GridConfig s_grid{.nx = 20, .ny = 20, .nt = 10};
  /// Coarsest grid of refinement-based checks.
  GridConfig refine_grid{.nx = 25, .ny = 25, .nt = 12};
  std::uint64_t seed = 0;
  std::size_t validation_samples = 10000;
  int s_trials = 10000;
  DppConfig dpp;
  PenaltyConfig penalty;
  ExitConfig exit{.dt_list = {1e-3, 1e-4, 1e-5}, .delta = 0.01, .paths = 20000, .level = 0.9};
  MomentConfig moments{.paths = 20000};
  CrossValidationConfig cross{.paths = 20000};
  /// min{F, V - SV} ceiling for the single-grid residual check.
  double residual_threshold = 1.0;
  int threads = 1;
  /// Run only the named checks when nonempty.
  std::vector<std::string> only;
};

/// Names in execution order.
std::vector<std::string> check_names();

/// Checks run when VerifyConfig::only is empty. residual_refinement runs
/// only on request.
std::vector<std::string> default_check_names();

/// Runs the selected checks. Child seeds derive from cfg.seed and the
/// check name.
std::vector<CheckResult> full_report(const ProblemSpec& spec, const VerifyConfig& cfg);

bool all_passed(const std::vector<CheckResult>& results);

nlohmann::json report_json(const std::vector<CheckResult>& results);
nlohmann::json timing_json(const std::vector<CheckResult>& results);

void print_summary(std::ostream& out, const std::vector<CheckResult>& results);

}  // namespace switchgrid::verify
