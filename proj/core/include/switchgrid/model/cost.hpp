#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace switchgrid {

/// Transaction cost tabulated over trade sizes [-R, R].
class CostFunction {
 public:
  /// `values[k]` is the cost of trade size k - max_trade.
  CostFunction(int max_trade, std::vector<double> values);

  static CostFunction tabulate(int max_trade, const std::function<double(int)>& f);
  static CostFunction fixed_plus_proportional(double fixed, double prop, int max_trade);

  int max_trade() const noexcept { return max_trade_; }
  bool in_range(int dz) const noexcept { return dz >= -max_trade_ && dz <= max_trade_; }

  /// Throws std::out_of_range outside [-R, R].
  double operator()(int dz) const;

  std::span<const double> table() const noexcept { return values_; }

  /// Smallest cost over nonzero trades; +inf when R = 0.
  double min_nonzero() const;

  nlohmann::json to_json() const;

 private:
  int max_trade_;
  std::vector<double> values_;
};

double cost_eval(const CostFunction& cost, int dz);

struct SubadditivityResult {
  bool subadditive = true;
  std::optional<std::pair<int, int>> witness;
};

/// Exhaustive test of c(z1) + c(z2) >= c(z1 + z2) over representable pairs.
SubadditivityResult is_subadditive(const CostFunction& cost);

/// Subadditive envelope: cheapest decomposition into trades with every
/// partial sum confined to [-part_bound, part_bound]. Requires nonnegative
/// costs and part_bound >= max_trade.
CostFunction subadditivize(const CostFunction& cost, int part_bound);

}  // namespace switchgrid
