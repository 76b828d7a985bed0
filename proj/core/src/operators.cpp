#include "switchgrid/grid/operators.hpp"

#include <cmath>
#include <cstdlib>

namespace switchgrid {

double generator_apply(const ProblemSpec& spec, const TestDerivatives& d, const PortfolioState& at) {
  const double b = spec.market.drift(at.t, at.x);
  const double s = spec.market.volatility(at.t, at.x);
  const double s2 = s * s;
  const double z = at.z;
  return b * d.x + 0.5 * s2 * d.xx + z * b * d.y + 0.5 * z * z * s2 * d.yy + z * s2 * d.xy;
}

double hjb_residual(const ProblemSpec& spec, double q, std::array<double, 2> p, const SymMatrix2& a,
                    const PortfolioState& at) {
  const TestDerivatives d{q, p[0], p[1], a.a11, a.a22, a.a12};
  return -q - generator_apply(spec, d, at);
}

namespace {

// Candidates in tie-break order: 0, -1, 1, -2, 2, ...
template <class Visit>
void for_each_candidate(const PositionSet& k, int z, Visit&& visit) {
  for (int r = 0; r <= k.c2 + k.c3; ++r) {
    for (int zt : {-r, r}) {
      if (r == 0 && zt != 0) continue;
      if (zt != z && k.contains(zt)) visit(zt);
      if (r == 0) break;
    }
  }
}

}  // namespace

std::optional<Intervention> apply_intervention(const ProblemSpec& spec, const FieldSlice& slice, int z,
                                               int i, int j, Interpolation order) {
  const GridGeometry& g = slice.geometry();
  const double y = g.y(z, j);
  const bool constrained = g.kind() == SolveKind::kConstrained;
  std::optional<Intervention> best;
  for_each_candidate(spec.positions, z, [&](int zt) {
    if (constrained && !in_gamma(spec, y, z, zt)) return;
    const double post = y - spec.cost(zt - z);
    const double jf = (post - g.floor(zt)) / g.dy();
    const double v = slice.column_value(zt, i, jf, order);
    if (!best || v > best->value + 1e-12 * std::max(1.0, std::abs(best->value))) {
      best = Intervention{v, zt};
    }
  });
  return best;
}

}  // namespace switchgrid
