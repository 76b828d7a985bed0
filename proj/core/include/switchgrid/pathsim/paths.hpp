#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "switchgrid/model/problem.hpp"

namespace switchgrid {

struct PathConfig {
  std::size_t n_paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 0;
  bool antithetic = false;
  int threads = 1;
};

/// Standard normal stream of one path. Antithetic partners share a stream
/// and the odd member negates every draw.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::size_t path, bool antithetic);
  double normal();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
  double sign_ = 1.0;
};

/// Number of steps of size dt covering [t0, horizon]. Throws
/// std::invalid_argument when dt misses the horizon by more than one step.
int step_count(double t0, double horizon, double dt);

/// One Euler step, clamped at 0. A path at 0 stays there.
double euler_step(const ProblemSpec& spec, double t, double x, double dt, double normal);

/// Price paths on the time grid t0 + k dt, k = 0..steps.
struct PriceBundle {
  std::size_t n_paths = 0;
  int steps = 0;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> x;  ///< path-major

  double at(std::size_t path, int step) const {
    return x[path * static_cast<std::size_t>(steps + 1) + static_cast<std::size_t>(step)];
  }
};

PriceBundle simulate_paths(const ProblemSpec& spec, const PortfolioState& start, const PathConfig& cfg);

/// y + z dX.
double wealth_step(const PortfolioState& state, double dx);

struct SwitchEvent {
  double time = 0.0;
  int from_z = 0;
  int to_z = 0;
  double cost_paid = 0.0;
};

/// Pays c(target - z) and moves to target. Throws AdmissibilityError when
/// target is not in the admissible set.
std::pair<PortfolioState, SwitchEvent> apply_switch(const ProblemSpec& spec,
                                                    const PortfolioState& state, int target);

/// y <= c(-z).
bool detect_margin_call(const ProblemSpec& spec, const PortfolioState& state);

}  // namespace switchgrid
