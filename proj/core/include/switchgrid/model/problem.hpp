#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchgrid/model/cost.hpp"
#include "switchgrid/model/market.hpp"
#include "switchgrid/model/utility.hpp"

namespace switchgrid {

/// Tolerance used when comparing wealth against cost sums.
inline constexpr double kWealthTol = 1e-12;

/// K = {-c2, ..., c3}.
struct PositionSet {
  int c2 = 0;
  int c3 = 0;

  int lowest() const noexcept { return -c2; }
  int highest() const noexcept { return c3; }
  int size() const noexcept { return c2 + c3 + 1; }
  int max_abs() const noexcept { return c2 > c3 ? c2 : c3; }
  bool contains(int z) const noexcept { return z >= -c2 && z <= c3; }
  int index(int z) const noexcept { return z + c2; }
  int at(int index) const noexcept { return index - c2; }
  std::vector<int> values() const;
};

struct PortfolioState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  int z = 0;
};

struct ProblemSpec {
  MarketModel market;
  CostFunction cost;
  Utility utility;
  PositionSet positions;
  double horizon = 1.0;
};

/// Checks the structural requirements (cost table covers the reachable
/// trade range, horizon > 0, c2, c3 >= 0) and assembles the spec.
/// Axioms are left to validate_spec. Throws std::invalid_argument.
ProblemSpec make_problem(MarketModel market, CostFunction cost, Utility utility,
                         PositionSet positions, double horizon);

/// The reference instance: capped GBM, fixed-plus-proportional cost, sqrt
/// utility, K = {-1, ..., 2}, T = 1.
ProblemSpec ref1_problem();

/// c(-z).
double solvency_floor(const ProblemSpec& spec, int z);

/// Positions reachable from z by one trade with c(zt - z) + c(-zt) <= y.
/// Sorted ascending.
std::vector<int> gamma_set(const ProblemSpec& spec, double y, int z);

bool in_gamma(const ProblemSpec& spec, double y, int z, int target);

/// rho = min_{z != 0} c(z) / 2.
double rho_constant(const ProblemSpec& spec);

/// C5 = sup|b| (max(C2, C3) + 1) + 2 rho, when the market is bounded.
std::optional<double> c5_constant(const ProblemSpec& spec);

nlohmann::json to_json(const ProblemSpec& spec);
std::uint64_t spec_hash(const ProblemSpec& spec);

/// Parses a problem document. Throws ConfigError naming the offending key,
/// prefixed with `key_prefix` when nonempty.
ProblemSpec problem_from_json(const nlohmann::json& doc, const std::string& key_prefix = "");

}  // namespace switchgrid
