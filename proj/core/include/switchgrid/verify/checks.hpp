#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "switchgrid/grid/grid.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/grid/value_field.hpp"
#include "switchgrid/model/problem.hpp"
#include "switchgrid/pathsim/paths.hpp"
#include "switchgrid/verify/check.hpp"

namespace switchgrid::verify {

CheckResult check_validate_spec(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed);

/// Monotonicity and sub-distributivity of S over random field pairs on the
/// grid, plus the continuity comparison on grid and refined grid.
CheckResult check_s_properties(const ProblemSpec& spec, const GridConfig& grid, int trials,
                               std::uint64_t seed);

struct DppConfig {
  int nodes = 24;
  std::size_t paths = 10000;
  int substeps = 10;
  double disc_tol = 2e-3;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// One-step martingale test: at sampled interior no-action nodes the mean
/// of V(t + dt) along unswitched paths must match V(t); at switch nodes it
/// must not exceed V(t).
CheckResult check_dpp_onestep(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field,
                              const StrategyMap& strategy, const DppConfig& cfg);

struct PenaltyConfig {
  double x_bar = 4.0;
  double tol = 1e-8;
  /// h at the smallest epsilon must fall below this fraction of max V.
  double threshold_fraction = 0.15;
};

CheckResult check_penalty_convergence(const ProblemSpec& spec, const GridConfig& grid,
                                      const std::vector<double>& epsilon_list,
                                      const PenaltyConfig& cfg = {});

/// Same check on precomputed fields, `penalized[k]` solved with epsilon_list[k].
CheckResult check_penalty_convergence(const ValueField& constrained,
                                      const std::vector<ValueField>& penalized,
                                      const std::vector<double>& epsilon_list,
                                      const PenaltyConfig& cfg = {});

/// sup over floor nodes z != 0, x <= x_bar, all t.
double boundary_sup(const ValueField& field, double x_bar);

/// Gaps of g = x + y + C5 (T - t). Throws ConfigError without a sup bound.
CheckResult check_strict_supersolution_gap(const ProblemSpec& spec, const GridConfig& grid,
                                           double tol = 1e-12);

struct ExitConfig {
  std::vector<double> dt_list{1e-3, 1e-4, 1e-5};
  double delta = 0.01;
  std::size_t paths = 100000;
  double level = 0.9;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Hold-z paths from a floor state: probability that Y drops below c(-z)
/// by t + delta, for each dt. All levels monitor the same Brownian path.
CheckResult check_immediate_exit(const ProblemSpec& spec, const PortfolioState& start,
                                 const ExitConfig& cfg);

/// Scalar Ito process X(t) = int b dt + int s dW from X(0) = 0.
struct ItoProcess {
  std::function<double(double t, double x)> drift;
  std::function<double(double t, double x)> volatility;
};

/// Probability that X exceeds 0 by time delta under discrete monitoring.
std::vector<double> crossing_probabilities(const ItoProcess& process, const ExitConfig& cfg);

CheckResult check_ito_crossing(const std::string& name, const ItoProcess& process,
                               const ExitConfig& cfg);

struct MomentConfig {
  std::vector<double> x_sweep{1.0, 2.0, 4.0, 8.0};
  double y = 1.0;
  int z = 1;
  int m = 2;
  std::size_t paths = 100000;
  double dt = 1e-3;
  double band = 2.0;
  /// Coupled starts (x, y) and (x + d, y + d) for d = d0, d0/2.
  double coupled_x = 4.0;
  double coupled_d0 = 0.2;
  double coupled_tol = 0.2;
  std::uint64_t seed = 0;
  int threads = 1;
};

CheckResult check_moment_bounds(const ProblemSpec& spec, const MomentConfig& cfg);

/// Ratio of the x-edge value to x_max on fields solved over x_max and
/// 2 x_max, plus the envelope V <= U(y + C x).
CheckResult check_sublinear_edges(const ProblemSpec& spec, const GridConfig& grid,
                                  const ValueField& field, const ValueField& doubled);

/// Prefix maximum f* of samples f(x_k) and f*(x_k) / x_k.
struct RunningSupTable {
  std::vector<double> x;
  std::vector<double> running_sup;
  std::vector<double> ratio;    ///< 0 at x = 0
  bool sublinear = true;        ///< ratio at the right edge below its maximum
};
RunningSupTable running_sup_ratio(const std::vector<double>& x, const std::vector<double>& f);

/// V >= SV - tol at every node.
CheckResult check_dominance(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field,
                            double tol = 1e-10);

/// Interior residual L-inf at most `threshold`.
CheckResult check_residual(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field,
                           double threshold);

/// Terminal slice exact and floor rows z != 0 at most tol.
CheckResult check_boundary_data(const ProblemSpec& spec, const ValueField& field, double tol = 1e-8);

/// Interior residual L-inf shrinks by `factor` per refinement over grids
/// base, 2 base, 4 base.
CheckResult check_residual_refinement(const ProblemSpec& spec, const GridConfig& base,
                                      double factor = 1.5);

/// Max distance between consecutive refinements on common nodes decreases.
CheckResult check_continuity_refinement(const ProblemSpec& spec, const GridConfig& base);

/// No-action nodes with a no-action neighbourhood stay no-action on the
/// refined grid.
CheckResult check_no_action_openness(const ProblemSpec& spec, const GridConfig& base);

/// Implicit/linear against explicit/cubic solves.
CheckResult check_uniqueness(const ProblemSpec& spec, const GridConfig& base);

struct CrossValidationConfig {
  PortfolioState start{0.0, 1.0, 1.0, 0};
  std::size_t paths = 100000;
  double dt = 1e-3;
  double rel_tol = 0.03;
  std::uint64_t seed = 0;
  int threads = 1;
};

CheckResult check_pde_mc(const ProblemSpec& spec, const ValueField& field, const StrategyMap& strategy,
                         const CrossValidationConfig& cfg);

}  // namespace switchgrid::verify
