#pragma once

#include <istream>
#include <map>
#include <optional>
#include <vector>

#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/grid/value_field.hpp"
#include "switchgrid/model/problem.hpp"

namespace switchgrid {

struct PolicyDecision {
  std::optional<int> target;  ///< switch target, empty to hold
  bool covered = true;        ///< state lies inside the data the policy was built from
};

/// Trading rule consulted once per time step.
class StrategyPolicy {
 public:
  virtual ~StrategyPolicy() = default;
  virtual PolicyDecision decide(const PortfolioState& state) const = 0;
};

/// Never trades before the horizon.
class HoldPolicy final : public StrategyPolicy {
 public:
  PolicyDecision decide(const PortfolioState&) const override { return {}; }
};

/// Moves to a fixed position at the first step where it is admissible.
class ConstantPolicy final : public StrategyPolicy {
 public:
  ConstantPolicy(const ProblemSpec& spec, int z) : spec_(&spec), z_(z) {}
  PolicyDecision decide(const PortfolioState& state) const override;

 private:
  const ProblemSpec* spec_;
  int z_;
};

/// Policy read off a solved field: the gap V - SV is interpolated bilinearly
/// in (x, y) and linearly in t, a switch is taken when it falls to the
/// strict tolerance, and the target is the best admissible switch at the
/// actual state.
class FieldStrategyPolicy final : public StrategyPolicy {
 public:
  FieldStrategyPolicy(const ProblemSpec& spec, const ValueField& field, const StrategyMap& strategy);
  PolicyDecision decide(const PortfolioState& state) const override;

 private:
  std::optional<double> gap_at(int n, int z, double x, double y) const;

  const ProblemSpec* spec_;
  const ValueField* field_;
  const StrategyMap* strategy_;
};

/// Policy parsed from strategy CSV rows: the latest exported slice at or
/// before t, nearest node in x and y.
class TabulatedPolicy final : public StrategyPolicy {
 public:
  TabulatedPolicy(const ProblemSpec& spec, std::istream& csv);
  PolicyDecision decide(const PortfolioState& state) const override;

  std::size_t rows() const noexcept { return rows_; }

 private:
  struct Table {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::int8_t> target;  ///< -128 marks no action
  };

  const ProblemSpec* spec_;
  std::vector<double> times_;
  std::vector<std::map<int, Table>> tables_;
  std::size_t rows_ = 0;
};

}  // namespace switchgrid
