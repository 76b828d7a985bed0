#include "switchgrid/grid/solver.hpp"

#include <algorithm>
#include <cmath>

#include "stepper.hpp"

namespace switchgrid {

std::shared_ptr<const GridGeometry> make_geometry(const ProblemSpec& spec, const GridConfig& grid,
                                                  SolveKind kind) {
  return std::make_shared<const GridGeometry>(spec, grid, kind);
}

FieldSlice terminal_condition(const ProblemSpec& spec, std::shared_ptr<const GridGeometry> geometry) {
  FieldSlice slice(geometry);
  const GridGeometry& g = *geometry;
  for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
    for (int i = 0; i <= g.nx(); ++i) {
      for (int j = g.j_lo(); j <= g.j_hi(z); ++j) {
        // y - c(-z) = j dy exactly on this layout.
        slice.at(z, i, j) = g.dirichlet(j) ? 0.0 : spec.utility(j * g.dy());
      }
    }
  }
  return slice;
}

FieldSlice terminal_condition(const ProblemSpec& spec, const GridConfig& grid) {
  return terminal_condition(spec, make_geometry(spec, grid, SolveKind::kConstrained));
}

FieldSlice step_backward(const ProblemSpec& spec, const GridConfig& grid, const FieldSlice& next, int n,
                         double epsilon, StepStats* stats) {
  detail::Stepper stepper(spec, grid, next.geometry_ptr(), epsilon);
  FieldSlice out(next.geometry_ptr());
  stepper.step(next, out, n, stats);
  return out;
}

namespace {

ValueField sweep(const ProblemSpec& spec, const GridConfig& grid, SolveKind kind, double epsilon,
                 SolveStats* stats) {
  auto geo = make_geometry(spec, grid, kind);
  FieldMetadata meta{spec_hash(spec), grid_hash(grid), kind, kind == SolveKind::kPenalized ? epsilon : 0.0};
  ValueField field(geo, grid, meta);
  field.slice(geo->nt()) = terminal_condition(spec, geo);
  detail::Stepper stepper(spec, grid, geo, epsilon);
  SolveStats local;
  for (int n = geo->nt() - 1; n >= 0; --n) {
    StepStats s;
    stepper.step(field.slice(n + 1), field.slice(n), n, &s);
    ++local.steps;
    local.max_intervention_rounds = std::max(local.max_intervention_rounds, s.intervention_rounds);
    local.total_intervention_rounds += s.intervention_rounds;
    local.explicit_substeps = std::max(local.explicit_substeps, s.explicit_substeps);
  }
  if (stats) *stats = local;
  return field;
}

}  // namespace

ValueField solve_field(const ProblemSpec& spec, const GridConfig& grid, SolveStats* stats) {
  return sweep(spec, grid, SolveKind::kConstrained, 0.0, stats);
}

QviSolution solve_qvi(const ProblemSpec& spec, const GridConfig& grid) {
  SolveStats stats;
  ValueField field = solve_field(spec, grid, &stats);
  ResidualReport residuals = qvi_residual_report(spec, grid, field);
  return QviSolution{std::move(field), std::move(residuals), stats};
}

ValueField solve_penalized(const ProblemSpec& spec, const GridConfig& grid, double epsilon,
                           SolveStats* stats) {
  return sweep(spec, grid, SolveKind::kPenalized, epsilon, stats);
}

int intervention_round_bound(const ProblemSpec& spec, const GridConfig& grid) {
  const double min_cost = spec.cost.min_nonzero();
  if (!std::isfinite(min_cost) || min_cost <= 0.0) return grid.max_intervention_iters;
  return static_cast<int>(std::ceil(grid.y_max / min_cost)) + 1;
}

}  // namespace switchgrid
