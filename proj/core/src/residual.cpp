#include "switchgrid/grid/residual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "switchgrid/grid/operators.hpp"

namespace switchgrid {

nlohmann::json ResidualReport::to_json() const {
  nlohmann::json per_slice = nlohmann::json::array();
  for (const auto& s : slices) {
    per_slice.push_back({{"n", s.n}, {"z", s.z}, {"linf", s.linf}, {"l1", s.l1},
                         {"interior_nodes", s.interior_nodes}, {"violations", s.violations}});
  }
  auto node = [](const WorstNode& w) {
    return nlohmann::json{{"n", w.n}, {"z", w.z}, {"i", w.i}, {"j", w.j}, {"value", w.value}};
  };
  return {{"linf", linf},
          {"l1", l1},
          {"violations", violations},
          {"tolerance", tolerance},
          {"min_gap", min_gap},
          {"worst_residual", node(worst_residual)},
          {"worst_violation", node(worst_violation)},
          {"slices", per_slice}};
}

ResidualReport qvi_residual_report(const ProblemSpec& spec, const GridConfig& grid,
                                   const ValueField& field, double tol) {
  const GridGeometry& g = field.geometry();
  ResidualReport report;
  report.tolerance = tol;
  report.min_gap = std::numeric_limits<double>::infinity();
  const double dx = g.dx();
  const double dt = g.dt();
  const double collar = grid.residual_collar;
  const double x_lo = collar * g.x(g.nx());
  const double x_hi = (1.0 - collar) * g.x(g.nx());

  for (int n = 0; n <= g.nt(); ++n) {
    const FieldSlice& now = field.slice(n);
    const FieldSlice& next = field.slice(std::min(n + 1, g.nt()));
    for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
      SliceResidual sr{n, z, 0.0, 0.0, 0, 0};
      const double f = g.floor(z);
      const double span = g.y_top(z) - f;
      const double y_lo = f + collar * span;
      const double y_hi = g.y_top(z) - collar * span;
      for (int i = 0; i <= g.nx(); ++i) {
        for (int j = std::max(g.j_lo(), 0); j <= g.j_hi(z); ++j) {
          const double v = now.at(z, i, j);
          const auto s = apply_intervention(spec, now, z, i, j, grid.interpolation);
          if (s) {
            const double gap = v - s->value;
            if (gap < report.min_gap) report.min_gap = gap;
            if (gap < -tol) {
              ++sr.violations;
              if (report.violations == 0 || gap < report.worst_violation.value) {
                report.worst_violation = {n, z, i, j, gap};
              }
              ++report.violations;
            }
          }
          const double x = g.x(i);
          const double y = g.y(z, j);
          // L only differentiates along (1, z); the stencil follows the
          // characteristic line through the node, j -> j + z m per column.
          const int sj = z * g.shear();
          const int jb = std::max(g.j_lo(), 0);
          const bool interior = n < g.nt() && i > 0 && i < g.nx() && j > jb && j < g.j_hi(z) && j - std::abs(sj) >= jb &&
                                j + std::abs(sj) <= g.j_hi(z) && x >= x_lo - 1e-12 && x <= x_hi + 1e-12 &&
                                y >= y_lo - 1e-12 && y <= y_hi + 1e-12;
          if (!interior) continue;
          const double q = (next.at(z, i, j) - v) / dt;
          const double vp = now.at(z, i + 1, j + sj);
          const double vm = now.at(z, i - 1, j - sj);
          const std::array<double, 2> p{(vp - vm) / (2 * dx), 0.0};
          SymMatrix2 a;
          a.a11 = (vp - 2 * v + vm) / (dx * dx);
          const double fres = hjb_residual(spec, q, p, a, {g.t(n), x, y, z});
          const double r = s ? std::min(fres, v - s->value) : fres;
          const double mag = std::abs(r);
          ++sr.interior_nodes;
          sr.l1 += mag * dx * g.dy();
          if (mag > sr.linf) sr.linf = mag;
          if (mag > report.linf) {
            report.linf = mag;
            report.worst_residual = {n, z, i, j, r};
          }
        }
      }
      report.l1 += sr.l1 * dt;
      if (n < g.nt() || sr.violations > 0) report.slices.push_back(sr);
    }
  }
  if (!std::isfinite(report.min_gap)) report.min_gap = 0.0;
  return report;
}

}  // namespace switchgrid
