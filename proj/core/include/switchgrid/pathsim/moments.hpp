#pragma once

#include <cstddef>

#include "switchgrid/pathsim/paths.hpp"
#include "switchgrid/pathsim/policy.hpp"

namespace switchgrid {

struct MomentEstimate {
  double estimate = 0.0;
  double se = 0.0;
  std::size_t n_paths = 0;
  int m = 0;
};

/// E[ sup_s |Y(s) - y + sum c(dZ)|^m ] over [start.t, T]. Paths are not
/// stopped at margin calls; switches requested by the policy are taken
/// when admissible.
MomentEstimate moment_statistics(const ProblemSpec& spec, const PortfolioState& start,
                                 const PathConfig& cfg, int m, const StrategyPolicy& policy);

struct CoupledEstimate {
  double estimate = 0.0;  ///< E[ sup_s |Y1(s) - Y2(s)|^m ]
  double se = 0.0;
  double scale = 0.0;     ///< |x1 - x2|^m + |y1 - y2|^m
  double fitted_constant = 0.0;
  std::size_t n_paths = 0;
};

/// Two copies driven by the same normals. Starts must share t and z.
CoupledEstimate coupled_paths(const ProblemSpec& spec, const PortfolioState& start1,
                              const PortfolioState& start2, const PathConfig& cfg, int m,
                              const StrategyPolicy& policy);

}  // namespace switchgrid
