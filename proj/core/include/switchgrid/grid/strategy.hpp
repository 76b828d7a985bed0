#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "switchgrid/grid/value_field.hpp"
#include "switchgrid/model/cost.hpp"

namespace switchgrid {

enum class Action : std::uint8_t { kNoAction, kSwitch };

struct NodeDecision {
  Action action = Action::kNoAction;
  int target = 0;            ///< meaningful for kSwitch
  double post_wealth = 0.0;  ///< y - c(target - z)
};

/// Node classification of every slice of a constrained solve.
class StrategyMap {
 public:
  StrategyMap(std::shared_ptr<const GridGeometry> geometry, CostFunction cost, double strict_tol);

  const GridGeometry& geometry() const noexcept { return *geometry_; }
  double strict_tol() const noexcept { return strict_tol_; }

  NodeDecision decision(int n, int z, int i, int j) const;

  /// V - SV at the node, std::nullopt where no switch is admissible.
  std::optional<double> gap(int n, int z, int i, int j) const;

  /// Nodes (i, j) of position z at slice n with V > SV + strict_tol,
  /// including nodes where no switch is admissible.
  std::vector<std::pair<int, int>> no_action_region(int n, int z) const;

  void set(int n, int z, int i, int j, std::optional<double> gap, int target);

 private:
  std::size_t slot(int n, int z, int i, int j) const;

  std::shared_ptr<const GridGeometry> geometry_;
  CostFunction cost_;
  double strict_tol_;
  std::vector<std::size_t> z_offset_;
  std::size_t slice_size_ = 0;
  std::vector<double> gap_;
  std::vector<std::uint8_t> applicable_;
  std::vector<std::int8_t> target_;
};

/// Classifies every node: no-action iff V > SV + strict_tol, otherwise a
/// switch to the best target. At the terminal slice positions z != 0 switch
/// to 0 wherever clearing is admissible.
StrategyMap extract_strategy(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field);

}  // namespace switchgrid
