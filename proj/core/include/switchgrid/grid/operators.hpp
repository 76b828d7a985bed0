#pragma once

#include <array>
#include <optional>

#include "switchgrid/grid/value_field.hpp"
#include "switchgrid/model/problem.hpp"

namespace switchgrid {

/// Derivatives of a test function at one point.
struct TestDerivatives {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

struct SymMatrix2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;
};

/// L phi = b phi_x + s^2/2 phi_xx + z b phi_y + z^2 s^2/2 phi_yy + z s^2 phi_xy.
double generator_apply(const ProblemSpec& spec, const TestDerivatives& d, const PortfolioState& at);

/// F = -q - (b p1 + s^2/2 A11 + z b p2 + z^2 s^2/2 A22 + z s^2 A12).
double hjb_residual(const ProblemSpec& spec, double q, std::array<double, 2> p, const SymMatrix2& a,
                    const PortfolioState& at);

struct Intervention {
  double value = 0.0;
  int target = 0;
};

/// Best single switch from node (i, j) of position z. The candidate set is
/// the admissible set for constrained slices and every other position for
/// penalized slices. std::nullopt is the not-applicable outcome (no
/// candidate). Ties go to the smallest |target|, then the smallest target.
std::optional<Intervention> apply_intervention(const ProblemSpec& spec, const FieldSlice& slice,
                                               int z, int i, int j,
                                               Interpolation order = Interpolation::kLinear);

}  // namespace switchgrid
