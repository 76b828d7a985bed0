#include "switchgrid/grid/strategy.hpp"

#include "switchgrid/grid/operators.hpp"
#include "switchgrid/util/parallel.hpp"

namespace switchgrid {

StrategyMap::StrategyMap(std::shared_ptr<const GridGeometry> geometry, CostFunction cost,
                         double strict_tol)
    : geometry_(std::move(geometry)), cost_(std::move(cost)), strict_tol_(strict_tol) {
  const auto& k = geometry_->positions();
  for (int z = k.lowest(); z <= k.highest(); ++z) {
    z_offset_.push_back(slice_size_);
    slice_size_ += geometry_->nodes(z);
  }
  const std::size_t total = slice_size_ * static_cast<std::size_t>(geometry_->nt() + 1);
  gap_.assign(total, 0.0);
  applicable_.assign(total, 0);
  target_.assign(total, 0);
}

std::size_t StrategyMap::slot(int n, int z, int i, int j) const {
  return static_cast<std::size_t>(n) * slice_size_ +
         z_offset_[static_cast<std::size_t>(geometry_->positions().index(z))] + geometry_->offset(z, i, j);
}

void StrategyMap::set(int n, int z, int i, int j, std::optional<double> gap, int target) {
  const std::size_t s = slot(n, z, i, j);
  applicable_[s] = gap.has_value() ? 1 : 0;
  gap_[s] = gap.value_or(0.0);
  target_[s] = static_cast<std::int8_t>(target);
}

std::optional<double> StrategyMap::gap(int n, int z, int i, int j) const {
  const std::size_t s = slot(n, z, i, j);
  if (!applicable_[s]) return std::nullopt;
  return gap_[s];
}

NodeDecision StrategyMap::decision(int n, int z, int i, int j) const {
  const std::size_t s = slot(n, z, i, j);
  if (!applicable_[s] || gap_[s] > strict_tol_) return {};
  const int target = target_[s];
  return {Action::kSwitch, target, geometry_->y(z, j) - cost_(target - z)};
}

std::vector<std::pair<int, int>> StrategyMap::no_action_region(int n, int z) const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i <= geometry_->nx(); ++i) {
    for (int j = geometry_->j_lo(); j <= geometry_->j_hi(z); ++j) {
      if (decision(n, z, i, j).action == Action::kNoAction) out.emplace_back(i, j);
    }
  }
  return out;
}

StrategyMap extract_strategy(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field) {
  const GridGeometry& g = field.geometry();
  StrategyMap map(field.geometry_ptr(), spec.cost, grid.strict_tol);
  const auto& k = g.positions();
  const std::size_t ncols = static_cast<std::size_t>(g.nx() + 1);
  const std::size_t work = static_cast<std::size_t>(g.nt() + 1) * static_cast<std::size_t>(k.size()) * ncols;
  parallel_for(work, grid.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t w = begin; w < end; ++w) {
      const int n = static_cast<int>(w / (ncols * static_cast<std::size_t>(k.size())));
      const std::size_t rem = w % (ncols * static_cast<std::size_t>(k.size()));
      const int z = k.at(static_cast<int>(rem / ncols));
      const int i = static_cast<int>(rem % ncols);
      const FieldSlice& slice = field.slice(n);
      for (int j = g.j_lo(); j <= g.j_hi(z); ++j) {
        const auto s = apply_intervention(spec, slice, z, i, j, grid.interpolation);
        if (!s) {
          map.set(n, z, i, j, std::nullopt, 0);
          continue;
        }
        int target = s->target;
        double gap = slice.at(z, i, j) - s->value;
        if (n == g.nt() && z != 0 && in_gamma(spec, g.y(z, j), z, 0)) {
          // Positions are cleared at the horizon.
          target = 0;
          gap = 0.0;
        }
        map.set(n, z, i, j, gap, target);
      }
    }
  });
  return map;
}

}  // namespace switchgrid
