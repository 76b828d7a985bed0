#include "switchgrid/model/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "switchgrid/util/hash.hpp"

namespace switchgrid {

std::vector<int> PositionSet::values() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int z = lowest(); z <= highest(); ++z) out.push_back(z);
  return out;
}

ProblemSpec make_problem(MarketModel market, CostFunction cost, Utility utility,
                         PositionSet positions, double horizon) {
  if (positions.c2 < 0 || positions.c3 < 0) {
    throw std::invalid_argument("positions: c2 and c3 must be nonnegative");
  }
  if (cost.max_trade() < positions.c2 + positions.c3) {
    throw std::invalid_argument("cost table does not cover trade sizes up to c2 + c3");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("horizon must be positive");
  }
  if (!market.drift || !market.volatility) throw std::invalid_argument("market: missing coefficient");
  return ProblemSpec{std::move(market), std::move(cost), std::move(utility), positions, horizon};
}

ProblemSpec ref1_problem() {
  const PositionSet k{1, 2};
  return make_problem(capped_gbm(0.05, 0.3, 10.0),
                      CostFunction::fixed_plus_proportional(0.1, 0.05, k.c2 + k.c3),
                      power_utility(0.5), k, 1.0);
}

double solvency_floor(const ProblemSpec& spec, int z) { return spec.cost(-z); }

bool in_gamma(const ProblemSpec& spec, double y, int z, int target) {
  if (target == z || !spec.positions.contains(target)) return false;
  return spec.cost(target - z) + spec.cost(-target) <= y + kWealthTol;
}

std::vector<int> gamma_set(const ProblemSpec& spec, double y, int z) {
  std::vector<int> out;
  for (int zt = spec.positions.lowest(); zt <= spec.positions.highest(); ++zt) {
    if (in_gamma(spec, y, z, zt)) out.push_back(zt);
  }
  return out;
}

double rho_constant(const ProblemSpec& spec) { return 0.5 * spec.cost.min_nonzero(); }

std::optional<double> c5_constant(const ProblemSpec& spec) {
  if (!spec.market.sup_bound) return std::nullopt;
  return spec.market.drift_sup * (spec.positions.max_abs() + 1) + 2.0 * rho_constant(spec);
}

nlohmann::json to_json(const ProblemSpec& spec) {
  return {{"market", spec.market.descriptor},
          {"cost", spec.cost.to_json()},
          {"utility", spec.utility.descriptor()},
          {"positions", {{"c2", spec.positions.c2}, {"c3", spec.positions.c3}}},
          {"horizon", spec.horizon}};
}

std::uint64_t spec_hash(const ProblemSpec& spec) { return fnv1a(to_json(spec).dump()); }

}  // namespace switchgrid
