#pragma once

#include <memory>

#include "switchgrid/grid/residual.hpp"
#include "switchgrid/grid/value_field.hpp"

namespace switchgrid {

struct StepStats {
  int intervention_rounds = 0;
  int explicit_substeps = 0;
};

struct SolveStats {
  int steps = 0;
  int max_intervention_rounds = 0;
  long total_intervention_rounds = 0;
  int explicit_substeps = 0;
};

std::shared_ptr<const GridGeometry> make_geometry(const ProblemSpec& spec, const GridConfig& grid,
                                                  SolveKind kind);

/// U(y - c(-z)) at every node.
FieldSlice terminal_condition(const ProblemSpec& spec, std::shared_ptr<const GridGeometry> geometry);
FieldSlice terminal_condition(const ProblemSpec& spec, const GridConfig& grid);

/// One step from slice n+1 to slice n: a backward Euler step of u_t + Lu = 0
/// along each characteristic line, then u <- max(u, Su) to a fixed point.
/// `epsilon` sets the absorption rate of penalized slices.
FieldSlice step_backward(const ProblemSpec& spec, const GridConfig& grid, const FieldSlice& next,
                         int n, double epsilon = 0.0, StepStats* stats = nullptr);

struct QviSolution {
  ValueField field;
  ResidualReport residuals;
  SolveStats stats;
};

QviSolution solve_qvi(const ProblemSpec& spec, const GridConfig& grid);

/// Same sweep without the solvency constraint: rows extend y_below under
/// each floor and deficits are discounted at rate (c(-z) - y)^+ / epsilon.
ValueField solve_penalized(const ProblemSpec& spec, const GridConfig& grid, double epsilon,
                           SolveStats* stats = nullptr);

/// Constrained sweep without the residual report.
ValueField solve_field(const ProblemSpec& spec, const GridConfig& grid, SolveStats* stats = nullptr);

/// Upper bound on intervention rounds for one step.
int intervention_round_bound(const ProblemSpec& spec, const GridConfig& grid);

}  // namespace switchgrid
