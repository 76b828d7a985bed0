#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "switchgrid/grid/operators.hpp"
#include "switchgrid/grid/residual.hpp"
#include "switchgrid/grid/solver.hpp"
#include "switchgrid/model/validation.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/verify/checks.hpp"

namespace switchgrid::verify {

CheckResult check_validate_spec(const ProblemSpec& spec, std::size_t samples, std::uint64_t seed) {
  const ValidationReport rep = validate_spec(spec, samples, seed);
  CheckResult r;
  r.name = "validate_spec";
  r.seed = seed;
  r.samples = rep.samples;
  r.passed = rep.ok();
  r.details = rep.to_json();
  for (const auto& e : rep.entries) {
    if (e.passed) continue;
    if (e.warning_only) {
      r.warnings.push_back(e.name + ": " + e.witness);
    } else if (r.witness.is_null()) {
      r.witness = {{"entry", e.name}, {"sample", e.witness}};
    }
  }
  return r;
}

namespace {

struct SNode {
  int z, i, j;
};

std::vector<SNode> active_nodes(const GridGeometry& g) {
  std::vector<SNode> out;
  for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
    for (int i = 0; i <= g.nx(); ++i) {
      for (int j = g.j_lo(); j <= g.j_hi(z); ++j) out.push_back({z, i, j});
    }
  }
  return out;
}

void fill_random(FieldSlice& s, std::mt19937_64& rng, std::uniform_real_distribution<double>& u) {
  const auto& k = s.geometry().positions();
  for (int z = k.lowest(); z <= k.highest(); ++z) {
    for (double& v : s.values(z)) v = u(rng);
  }
}

// Largest difference between neighbouring nodes of position z along x and
// along y from row j0 up, over pairs whose endpoints pass `keep`.
template <class Value, class Keep>
double modulus(const GridGeometry& g, int z, int j0, Value&& value, Keep&& keep) {
  double w = 0.0;
  for (int i = 0; i <= g.nx(); ++i) {
    for (int j = j0; j <= g.j_hi(z); ++j) {
      if (i < g.nx() && keep(z, i, j, i + 1, j)) w = std::max(w, std::abs(value(z, i, j) - value(z, i + 1, j)));
      if (j < g.j_hi(z) && keep(z, i, j, i, j + 1)) {
        w = std::max(w, std::abs(value(z, i, j) - value(z, i, j + 1)));
      }
    }
  }
  return w;
}

}  // namespace

CheckResult check_s_properties(const ProblemSpec& spec, const GridConfig& grid, int trials, std::uint64_t seed) {
  CheckResult r;
  r.name = "s_properties";
  r.seed = seed;
  r.tolerance = 1e-12;
  const auto geo = make_geometry(spec, grid, SolveKind::kConstrained);
  const auto nodes = active_nodes(*geo);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FieldSlice u(geo), v(geo), w(geo), d(geo);
  long mono_checked = 0;
  long sub_checked = 0;
  int mono_fail = 0;
  int sub_fail = 0;
  for (int trial = 0; trial < trials; ++trial) {
    fill_random(u, rng, unit);
    fill_random(d, rng, unit);
    fill_random(w, rng, unit);
    // v <= u by construction.
    for (int z = geo->positions().lowest(); z <= geo->positions().highest(); ++z) {
      auto& vv = v.values(z);
      const auto& uu = u.values(z);
      const auto& dd = d.values(z);
      for (std::size_t k = 0; k < vv.size(); ++k) vv[k] = uu[k] - dd[k];
    }
    FieldSlice sum = u;
    for (int z = geo->positions().lowest(); z <= geo->positions().highest(); ++z) {
      auto& ss = sum.values(z);
      const auto& ww = w.values(z);
      for (std::size_t k = 0; k < ss.size(); ++k) ss[k] += ww[k];
    }
    for (const auto& n : nodes) {
      const auto su = apply_intervention(spec, u, n.z, n.i, n.j, grid.interpolation);
      if (!su) continue;
      const auto sv = apply_intervention(spec, v, n.z, n.i, n.j, grid.interpolation);
      ++mono_checked;
      if (sv->value > su->value + r.tolerance) {
        if (mono_fail++ == 0) {
          r.witness = {{"law", "monotonicity"}, {"trial", trial}, {"z", n.z}, {"i", n.i}, {"j", n.j},
                       {"Su", su->value}, {"Sv", sv->value}};
        }
      }
      const auto sw = apply_intervention(spec, w, n.z, n.i, n.j, grid.interpolation);
      const auto ssum = apply_intervention(spec, sum, n.z, n.i, n.j, grid.interpolation);
      ++sub_checked;
      if (ssum->value > su->value + sw->value + r.tolerance) {
        if (sub_fail++ == 0 && r.witness.is_null()) {
          r.witness = {{"law", "sub_distributivity"}, {"trial", trial}, {"z", n.z}, {"i", n.i}, {"j", n.j},
                       {"S(u+v)", ssum->value}, {"Su+Sv", su->value + sw->value}};
        }
      }
    }
  }

  // Continuity: the modulus of Su along grid edges is bounded by that of u,
  // on the grid and on its refinement, and shrinks with the mesh.
  GridConfig fine = grid;
  fine.nx *= 2;
  fine.ny *= 2;
  const auto geo_fine = make_geometry(spec, fine, SolveKind::kConstrained);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> freq(0.1, 0.6);
  int cont_fail = 0;
  const int smooth_trials = 20;
  nlohmann::json moduli = nlohmann::json::array();
  for (int trial = 0; trial < smooth_trials; ++trial) {
    const double a1 = freq(rng), a2 = freq(rng), p1 = phase(rng), p2 = phase(rng);
    auto smooth = [&](int z, double x, double y) {
      return 2.0 + std::sin(a1 * x + p1 + z) * std::cos(a2 * y + p2) + 0.1 * z;
    };
    double prev_su = -1.0;
    for (const auto& gp : {geo, geo_fine}) {
      const GridGeometry& g = *gp;
      FieldSlice s(gp);
      for (const auto& n : active_nodes(g)) s.at(n.z, n.i, n.j) = smooth(n.z, g.x(n.i), g.y(n.z, n.j));
      double wu = 0.0;
      double wsu = 0.0;
      for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
        wu = std::max(wu, modulus(g, z, g.j_lo(), [&](int zz, int i, int j) { return s.at(zz, i, j); },
                                  [](int, int, int, int, int) { return true; }));
        auto sval = [&](int zz, int i, int j) {
          return apply_intervention(spec, s, zz, i, j, grid.interpolation)->value;
        };
        auto same_gamma = [&](int zz, int i1, int j1, int i2, int j2) {
          (void)i1;
          (void)i2;
          const auto g1 = gamma_set(spec, g.y(zz, j1), zz);
          return !g1.empty() && g1 == gamma_set(spec, g.y(zz, j2), zz);
        };
        wsu = std::max(wsu, modulus(g, z, std::max(g.j_lo(), 1), sval, same_gamma));
      }
      moduli.push_back({{"trial", trial}, {"nx", g.nx()}, {"omega_u", wu}, {"omega_Su", wsu}});
      const bool bounded = wsu <= wu + r.tolerance;
      const bool shrinks = prev_su < 0.0 || wsu < prev_su;
      if (!bounded || !shrinks) {
        if (cont_fail++ == 0 && r.witness.is_null()) {
          r.witness = {{"law", "continuity"}, {"trial", trial}, {"nx", g.nx()}, {"omega_u", wu}, {"omega_Su", wsu},
                       {"omega_Su_coarse", prev_su}};
        }
      }
      prev_su = wsu;
    }
  }
  r.samples = static_cast<std::size_t>(trials);
  r.passed = mono_fail == 0 && sub_fail == 0 && cont_fail == 0;
  r.details = {{"trials", trials},
               {"monotonicity_checks", mono_checked},
               {"monotonicity_violations", mono_fail},
               {"subdistributivity_checks", sub_checked},
               {"subdistributivity_violations", sub_fail},
               {"continuity_trials", smooth_trials},
               {"continuity_violations", cont_fail},
               {"moduli", moduli}};
  return r;
}

CheckResult check_strict_supersolution_gap(const ProblemSpec& spec, const GridConfig& grid, double tol) {
  const auto c5 = c5_constant(spec);
  if (!c5) throw ConfigError("market.sup_bound", "strict supersolution check needs bounded coefficients");
  const double rho = rho_constant(spec);
  CheckResult r;
  r.name = "strict_supersolution_gap";
  r.tolerance = tol;
  const auto geo = make_geometry(spec, grid, SolveKind::kConstrained);
  const GridGeometry& g = *geo;
  const double big_t = spec.horizon;
  // g - Sg does not depend on t; evaluate it on the t = 0 slice.
  FieldSlice gs(geo);
  for (const auto& n : active_nodes(g)) gs.at(n.z, n.i, n.j) = g.x(n.i) + g.y(n.z, n.j) + *c5 * big_t;
  double worst_jump = std::numeric_limits<double>::infinity();
  double worst_pde = std::numeric_limits<double>::infinity();
  nlohmann::json w_jump, w_pde;
  std::size_t count = 0;
  for (const auto& n : active_nodes(g)) {
    const auto s = apply_intervention(spec, gs, n.z, n.i, n.j, Interpolation::kLinear);
    if (s) {
      const double gap = gs.at(n.z, n.i, n.j) - s->value;
      if (gap < worst_jump) {
        worst_jump = gap;
        w_jump = {{"z", n.z}, {"x", g.x(n.i)}, {"y", g.y(n.z, n.j)}, {"gap", gap}};
      }
    }
    for (int t = 0; t <= g.nt(); ++t) {
      const PortfolioState at{g.t(t), g.x(n.i), g.y(n.z, n.j), n.z};
      const double gap = hjb_residual(spec, -*c5, {1.0, 1.0}, SymMatrix2{}, at);
      ++count;
      if (gap < worst_pde) {
        worst_pde = gap;
        w_pde = {{"t", at.t}, {"z", n.z}, {"x", at.x}, {"y", at.y}, {"gap", gap}};
      }
    }
  }
  const bool jump_ok = worst_jump >= 2 * rho - tol;
  const bool pde_ok = worst_pde >= 2 * rho - tol;
  r.passed = jump_ok && pde_ok;
  r.samples = count;
  if (!jump_ok) r.witness = {{"gap", "g - Sg"}, {"node", w_jump}};
  if (jump_ok && !pde_ok) r.witness = {{"gap", "-g_t - Lg"}, {"node", w_pde}};
  r.details = {{"rho", rho}, {"C5", *c5}, {"two_rho", 2 * rho}, {"min_jump_gap", worst_jump},
               {"min_pde_gap", worst_pde}, {"worst_jump_node", w_jump}, {"worst_pde_node", w_pde}};
  return r;
}

RunningSupTable running_sup_ratio(const std::vector<double>& x, const std::vector<double>& f) {
  RunningSupTable t;
  t.x = x;
  double best = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    best = k == 0 ? f[k] : std::max(best, f[k]);
    t.running_sup.push_back(best);
    t.ratio.push_back(x[k] > 0.0 ? best / x[k] : 0.0);
  }
  if (x.size() >= 2) {
    const double edge = x.back();
    std::size_t mid = 0;
    while (mid + 1 < x.size() && x[mid] < 0.5 * edge) ++mid;
    t.sublinear = t.ratio.back() < t.ratio[mid] * (1.0 - 1e-9);
  }
  return t;
}

CheckResult check_dominance(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field, double tol) {
  CheckResult r;
  r.name = "dominance";
  r.tolerance = tol;
  const GridGeometry& g = field.geometry();
  double worst = std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  int violations = 0;
  for (int n = 0; n <= g.nt(); ++n) {
    for (const auto& node : active_nodes(g)) {
      const auto s = apply_intervention(spec, field.slice(n), node.z, node.i, node.j, grid.interpolation);
      if (!s) continue;
      ++checked;
      const double gap = field.at(n, node.z, node.i, node.j) - s->value;
      if (gap < -tol) ++violations;
      if (gap < worst) {
        worst = gap;
        if (gap < -tol) {
          r.witness = {{"n", n}, {"t", g.t(n)}, {"z", node.z}, {"x", g.x(node.i)}, {"y", g.y(node.z, node.j)},
                       {"V", field.at(n, node.z, node.i, node.j)}, {"SV", s->value}, {"target", s->target}};
        }
      }
    }
  }
  r.samples = checked;
  r.passed = violations == 0;
  r.details = {{"nodes_checked", checked}, {"violations", violations},
               {"min_gap", std::isfinite(worst) ? worst : 0.0}};
  return r;
}

CheckResult check_residual(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field,
                           double threshold) {
  const ResidualReport rep = qvi_residual_report(spec, grid, field);
  CheckResult r;
  r.name = "qvi_residual";
  r.tolerance = threshold;
  r.passed = rep.linf <= threshold;
  const auto& w = rep.worst_residual;
  const GridGeometry& g = field.geometry();
  if (!r.passed) {
    r.witness = {{"n", w.n}, {"t", g.t(w.n)}, {"z", w.z}, {"x", g.x(w.i)}, {"y", g.y(w.z, w.j)}, {"residual", w.value}};
  }
  r.details = {{"linf", rep.linf}, {"l1", rep.l1}, {"violations", rep.violations}};
  return r;
}

CheckResult check_boundary_data(const ProblemSpec& spec, const ValueField& field, double tol) {
  CheckResult r;
  r.name = "boundary_data";
  r.tolerance = tol;
  const GridGeometry& g = field.geometry();
  int terminal_bad = 0;
  int floor_bad = 0;
  double worst_floor = 0.0;
  for (const auto& n : active_nodes(g)) {
    const double expect = spec.utility(g.y(n.z, n.j) - spec.cost(-n.z));
    const double got = field.at(g.nt(), n.z, n.i, n.j);
    if (got != expect && std::abs(got - expect) > 1e-15 * std::max(1.0, expect)) {
      if (terminal_bad++ == 0) {
        r.witness = {{"kind", "terminal"}, {"z", n.z}, {"x", g.x(n.i)}, {"y", g.y(n.z, n.j)}, {"value", got},
                     {"expected", expect}};
      }
    }
  }
  if (g.kind() == SolveKind::kConstrained) {
    for (int t = 0; t <= g.nt(); ++t) {
      for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
        if (z == 0) continue;
        for (int i = 0; i <= g.nx(); ++i) {
          const double v = field.at(t, z, i, 0);
          worst_floor = std::max(worst_floor, v);
          if (v > tol && floor_bad++ == 0 && r.witness.is_null()) {
            r.witness = {{"kind", "floor"}, {"n", t}, {"z", z}, {"x", g.x(i)}, {"value", v}};
          }
        }
      }
    }
  }
  r.passed = terminal_bad == 0 && floor_bad == 0;
  r.details = {{"terminal_mismatches", terminal_bad}, {"floor_violations", floor_bad}, {"max_floor_value", worst_floor}};
  return r;
}

}  // namespace switchgrid::verify
