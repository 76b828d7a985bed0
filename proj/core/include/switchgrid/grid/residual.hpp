#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "switchgrid/grid/value_field.hpp"
#include "switchgrid/model/problem.hpp"

namespace switchgrid {

struct SliceResidual {
  int n = 0;
  int z = 0;
  double linf = 0.0;
  double l1 = 0.0;
  int interior_nodes = 0;
  int violations = 0;  ///< nodes with V < SV - tol over the whole slice
};

struct WorstNode {
  int n = 0;
  int z = 0;
  int i = 0;
  int j = 0;
  double value = 0.0;
};

struct ResidualReport {
  std::vector<SliceResidual> slices;
  double linf = 0.0;
  double l1 = 0.0;
  int violations = 0;
  double tolerance = 0.0;
  WorstNode worst_residual;
  WorstNode worst_violation;  ///< most negative V - SV
  double min_gap = 0.0;       ///< min over applicable nodes of V - SV

  nlohmann::json to_json() const;
};

/// Residual of min{F, V - SV} on interior nodes of slices 0..nt-1, with
/// the time derivative taken forward and space derivatives centered.
/// Violations are counted against `tol` on every node.
ResidualReport qvi_residual_report(const ProblemSpec& spec, const GridConfig& grid,
                                   const ValueField& field, double tol = 1e-10);

}  // namespace switchgrid
