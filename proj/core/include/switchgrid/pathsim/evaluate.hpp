#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchgrid/pathsim/paths.hpp"
#include "switchgrid/pathsim/policy.hpp"

namespace switchgrid {

enum class StopCause { kHorizon, kMarginCall };

struct PathOutcome {
  StopCause cause = StopCause::kHorizon;
  double stop_time = 0.0;
  double wealth_at_stop = 0.0;  ///< before clearing
  int position_at_stop = 0;
  double terminal_wealth = 0.0;  ///< after clearing at the horizon
  std::vector<SwitchEvent> events;
  double total_cost = 0.0;
  /// U(y - c(-z)) at the stop.
  double payoff = 0.0;
  /// U(y) at a margin call, the payoff of the uncleared convention.
  double payoff_uncleared = 0.0;
  bool coverage_miss = false;
};

struct PathSample {
  std::size_t path = 0;
  int step = 0;
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  int z = 0;
};

struct EvalReport {
  double mean = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_uncleared = 0.0;
  double se_uncleared = 0.0;
  std::size_t horizon_stops = 0;
  std::size_t margin_calls = 0;
  std::size_t switches = 0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::size_t coverage_misses = 0;
  double dt = 0.0;
  bool antithetic = false;

  nlohmann::json to_json() const;
};

/// Simulates one path to its stop. Per step: margin-call test, at most one
/// switch, clearing at the horizon, then the price move with y += z dX.
PathOutcome simulate_outcome(const ProblemSpec& spec, const StrategyPolicy& policy,
                             const PortfolioState& start, const PathConfig& cfg, std::size_t path,
                             std::vector<PathSample>* trace = nullptr);

/// Monte Carlo over cfg.n_paths paths. With antithetic pairs the standard
/// error is computed from pair means. The first `dump_paths` paths are
/// recorded into `dump` when it is given.
EvalReport evaluate_strategy(const ProblemSpec& spec, const StrategyPolicy& policy,
                             const PortfolioState& start, const PathConfig& cfg,
                             std::vector<PathSample>* dump = nullptr, std::size_t dump_paths = 0);

void write_path_dump_csv(std::ostream& out, const std::vector<PathSample>& samples);

}  // namespace switchgrid
