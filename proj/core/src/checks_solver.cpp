#include <algorithm>
#include <cmath>

#include "switchgrid/grid/operators.hpp"
#include "switchgrid/grid/residual.hpp"
#include "switchgrid/grid/solver.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/verify/checks.hpp"

namespace switchgrid::verify {

namespace {

GridConfig refined(const GridConfig& g, int factor) {
  GridConfig out = g;
  out.nx *= factor;
  out.ny *= factor;
  out.nt *= factor;
  return out;
}

struct MaxDiff {
  double value = 0.0;
  nlohmann::json where;
};

// Largest |a - b| over the nodes of coarse field a, read from b at
// indices scaled by `ratio`, restricted to rows both solves store.
MaxDiff max_difference(const ValueField& a, const ValueField& b, int ratio) {
  MaxDiff d;
  const GridGeometry& ga = a.geometry();
  const GridGeometry& gb = b.geometry();
  for (int n = 0; n <= ga.nt(); ++n) {
    for (int z = ga.positions().lowest(); z <= ga.positions().highest(); ++z) {
      const int j0 = std::max(ga.j_lo(), (gb.j_lo() + ratio - 1) / ratio);
      for (int i = 0; i <= ga.nx(); ++i) {
        for (int j = j0; j <= ga.j_hi(z) && j * ratio <= gb.j_hi(z); ++j) {
          const double diff = std::abs(a.at(n, z, i, j) - b.at(n * ratio, z, i * ratio, j * ratio));
          if (diff > d.value) {
            d.value = diff;
            d.where = {{"t", ga.t(n)}, {"z", z}, {"x", ga.x(i)}, {"y", ga.y(z, j)}};
          }
        }
      }
    }
  }
  return d;
}

}  // namespace

double boundary_sup(const ValueField& field, double x_bar) {
  const GridGeometry& g = field.geometry();
  double best = 0.0;
  for (int n = 0; n <= g.nt(); ++n) {
    for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
      if (z == 0) continue;
      for (int i = 0; i <= g.nx() && g.x(i) <= x_bar + 1e-12; ++i) best = std::max(best, field.at(n, z, i, 0));
    }
  }
  return best;
}

CheckResult check_penalty_convergence(const ValueField& constrained, const std::vector<ValueField>& penalized,
                                      const std::vector<double>& epsilon_list, const PenaltyConfig& cfg) {
  if (penalized.size() != epsilon_list.size() || penalized.empty()) {
    throw ConfigError("grid.epsilon_list", "one penalized field per epsilon is required");
  }
  CheckResult r;
  r.name = "penalty_convergence";
  r.tolerance = cfg.tol;
  const GridGeometry& gc = constrained.geometry();
  long order_violations = 0;
  long bound_violations = 0;
  double worst_order = 0.0;
  double worst_bound = 0.0;
  for (std::size_t k = 0; k < penalized.size(); ++k) {
    const ValueField& pk = penalized[k];
    for (int n = 0; n <= gc.nt(); ++n) {
      for (int z = gc.positions().lowest(); z <= gc.positions().highest(); ++z) {
        for (int i = 0; i <= gc.nx(); ++i) {
          for (int j = 0; j <= gc.j_hi(z); ++j) {
            const double v = constrained.at(n, z, i, j);
            const double e = pk.at(n, z, i, j);
            if (v - e > cfg.tol) {
              ++bound_violations;
              if (v - e > worst_bound) {
                worst_bound = v - e;
                if (r.witness.is_null() || r.witness.value("kind", "") == "bound") {
                  r.witness = {{"kind", "bound"}, {"epsilon", epsilon_list[k]}, {"t", gc.t(n)}, {"z", z},
                               {"x", gc.x(i)}, {"y", gc.y(z, j)}, {"V", v}, {"V_eps", e}};
                }
              }
            }
            if (k > 0) {
              const double prev = penalized[k - 1].at(n, z, i, j);
              // Smaller epsilon penalizes harder.
              const double up = epsilon_list[k] < epsilon_list[k - 1] ? e - prev : prev - e;
              if (up > cfg.tol) {
                ++order_violations;
                if (up > worst_order) {
                  worst_order = up;
                  r.witness = {{"kind", "order"}, {"epsilon", epsilon_list[k]}, {"t", gc.t(n)}, {"z", z},
                               {"x", gc.x(i)}, {"y", gc.y(z, j)}, {"V_eps", e}, {"V_prev", prev}};
                }
              }
            }
          }
        }
      }
    }
  }

  double v_max = 0.0;
  for (int n = 0; n <= gc.nt(); ++n) {
    for (int z = gc.positions().lowest(); z <= gc.positions().highest(); ++z) {
      for (double v : constrained.slice(n).values(z)) v_max = std::max(v_max, v);
    }
  }
  nlohmann::json h = nlohmann::json::array();
  std::vector<double> hv;
  for (std::size_t k = 0; k < penalized.size(); ++k) {
    hv.push_back(boundary_sup(penalized[k], cfg.x_bar));
    h.push_back({{"epsilon", epsilon_list[k]}, {"h", hv.back()}});
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < hv.size(); ++k) {
    const bool finer = epsilon_list[k] < epsilon_list[k - 1];
    if (finer ? hv[k] >= hv[k - 1] : hv[k] <= hv[k - 1]) decreasing = false;
  }
  std::size_t smallest = 0;
  for (std::size_t k = 1; k < epsilon_list.size(); ++k) {
    if (epsilon_list[k] < epsilon_list[smallest]) smallest = k;
  }
  const double threshold = cfg.threshold_fraction * v_max;
  const bool below = hv[smallest] <= threshold;
  r.passed = order_violations == 0 && bound_violations == 0 && decreasing && below;
  if (r.witness.is_null() && !decreasing) r.witness = {{"kind", "h_not_decreasing"}, {"h", h}};
  if (r.witness.is_null() && !below) {
    r.witness = {{"kind", "h_above_threshold"}, {"h", hv[smallest]}, {"threshold", threshold}};
  }
  r.details = {{"x_bar", cfg.x_bar},
               {"h", h},
               {"h_decreasing", decreasing},
               {"max_V", v_max},
               {"threshold", threshold},
               {"order_violations", order_violations},
               {"bound_violations", bound_violations}};
  return r;
}

CheckResult check_penalty_convergence(const ProblemSpec& spec, const GridConfig& grid,
                                      const std::vector<double>& epsilon_list, const PenaltyConfig& cfg) {
  const ValueField v = solve_field(spec, grid);
  std::vector<ValueField> pen;
  pen.reserve(epsilon_list.size());
  for (double eps : epsilon_list) pen.push_back(solve_penalized(spec, grid, eps));
  return check_penalty_convergence(v, pen, epsilon_list, cfg);
}

CheckResult check_sublinear_edges(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field,
                                  const ValueField& doubled) {
  (void)grid;
  CheckResult r;
  r.name = "sublinear_edges";
  r.tolerance = 1e-9;
  const GridGeometry& g = field.geometry();
  const GridGeometry& g2 = doubled.geometry();
  const double x_max = g.x(g.nx());
  const double x_max2 = g2.x(g2.nx());
  const double c_env = spec.positions.max_abs() * std::expm1(spec.market.lipschitz_const * spec.horizon);
  long x_fail = 0, y_fail = 0, env_fail = 0;
  double worst_env = 0.0;
  nlohmann::json ratios = nlohmann::json::array();
  for (int n = 0; n <= g.nt(); n += std::max(1, g.nt() / 4)) {
    const double t = g.t(n);
    for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
      // x edge at a few interior wealth levels.
      for (double y : {g.floor(z) + 1.0, 0.5 * (g.floor(z) + g.y_top(z)), g.y_top(z)}) {
        const double r1 = field.sample(t, z, x_max, y) / x_max;
        const double r2 = doubled.sample(t, z, x_max2, y) / x_max2;
        if (!(r2 < r1 || (r1 == 0.0 && r2 == 0.0))) {
          if (x_fail++ == 0) {
            r.witness = {{"edge", "x"}, {"t", t}, {"z", z}, {"y", y}, {"ratio", r1}, {"ratio_doubled", r2}};
          }
        }
        ratios.push_back({{"edge", "x"}, {"t", t}, {"z", z}, {"y", y}, {"ratio", r1}, {"ratio_doubled", r2}});
      }
      const double y1 = g.y_top(z);
      const double y2 = g2.y_top(z);
      if (y2 > y1 + 1e-9) {
        for (double x : {1.0, 0.5 * x_max}) {
          const double r1 = field.sample(t, z, x, y1) / y1;
          const double r2 = doubled.sample(t, z, x, y2) / y2;
          if (!(r2 < r1)) {
            if (y_fail++ == 0 && r.witness.is_null()) {
              r.witness = {{"edge", "y"}, {"t", t}, {"z", z}, {"x", x}, {"ratio", r1}, {"ratio_doubled", r2}};
            }
          }
          ratios.push_back({{"edge", "y"}, {"t", t}, {"z", z}, {"x", x}, {"ratio", r1}, {"ratio_doubled", r2}});
        }
      }
    }
  }
  for (int n = 0; n <= g.nt(); ++n) {
    for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
      for (int i = 0; i <= g.nx(); ++i) {
        for (int j = std::max(0, g.j_lo()); j <= g.j_hi(z); ++j) {
          const double env = spec.utility(g.y(z, j) + c_env * g.x(i));
          const double excess = field.at(n, z, i, j) - env;
          if (excess > r.tolerance) {
            ++env_fail;
            if (excess > worst_env) {
              worst_env = excess;
              if (r.witness.is_null() || r.witness.contains("envelope")) {
                r.witness = {{"envelope", env}, {"V", field.at(n, z, i, j)}, {"t", g.t(n)}, {"z", z},
                             {"x", g.x(i)}, {"y", g.y(z, j)}};
              }
            }
          }
        }
      }
    }
  }
  r.passed = x_fail == 0 && y_fail == 0 && env_fail == 0;
  r.details = {{"envelope_slope", c_env}, {"x_edge_failures", x_fail}, {"y_edge_failures", y_fail},
               {"envelope_failures", env_fail}, {"ratios", ratios}};
  return r;
}

CheckResult check_residual_refinement(const ProblemSpec& spec, const GridConfig& base, double factor) {
  CheckResult r;
  r.name = "residual_refinement";
  r.tolerance = factor;
  std::vector<double> linf;
  nlohmann::json levels = nlohmann::json::array();
  for (int f : {1, 2, 4}) {
    const GridConfig g = refined(base, f);
    const QviSolution sol = solve_qvi(spec, g);
    linf.push_back(sol.residuals.linf);
    const auto& w = sol.residuals.worst_residual;
    const GridGeometry& geo = sol.field.geometry();
    levels.push_back({{"nx", g.nx}, {"ny", g.ny}, {"nt", g.nt}, {"linf", sol.residuals.linf},
                      {"l1", sol.residuals.l1},
                      {"worst", {{"t", geo.t(w.n)}, {"z", w.z}, {"x", geo.x(w.i)}, {"y", geo.y(w.z, w.j)}}}});
  }
  const double r1 = linf[0] / std::max(linf[1], 1e-300);
  const double r2 = linf[1] / std::max(linf[2], 1e-300);
  r.passed = r1 >= factor && r2 >= factor;
  if (!r.passed) r.witness = {{"ratios", {r1, r2}}, {"linf", linf}};
  r.details = {{"levels", levels}, {"ratios", {r1, r2}}};
  return r;
}

CheckResult check_continuity_refinement(const ProblemSpec& spec, const GridConfig& base) {
  CheckResult r;
  r.name = "continuity_refinement";
  const ValueField a = solve_field(spec, refined(base, 1));
  const ValueField b = solve_field(spec, refined(base, 2));
  const ValueField c = solve_field(spec, refined(base, 4));
  const MaxDiff d1 = max_difference(a, b, 2);
  const MaxDiff d2 = max_difference(b, c, 2);
  r.passed = d2.value < d1.value;
  if (!r.passed) r.witness = {{"d_coarse", d1.value}, {"d_fine", d2.value}, {"at", d2.where}};
  r.details = {{"d_coarse", d1.value}, {"d_fine", d2.value}, {"d_coarse_at", d1.where}, {"d_fine_at", d2.where}};
  return r;
}

CheckResult check_no_action_openness(const ProblemSpec& spec, const GridConfig& base) {
  CheckResult r;
  r.name = "no_action_openness";
  const GridConfig gf = refined(base, 2);
  const ValueField a = solve_field(spec, base);
  const ValueField b = solve_field(spec, gf);
  const StrategyMap sa = extract_strategy(spec, base, a);
  const StrategyMap sb = extract_strategy(spec, gf, b);
  const GridGeometry& g = a.geometry();
  long interior = 0;
  long lost = 0;
  for (int n = 0; n < g.nt(); ++n) {
    for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
      for (int i = 1; i < g.nx(); ++i) {
        for (int j = std::max(g.j_lo(), 0) + 1; j < g.j_hi(z); ++j) {
          bool open = true;
          for (int di = -1; di <= 1 && open; ++di) {
            for (int dj = -1; dj <= 1 && open; ++dj) {
              open = sa.decision(n, z, i + di, j + dj).action == Action::kNoAction;
            }
          }
          if (!open) continue;
          ++interior;
          if (sb.decision(2 * n, z, 2 * i, 2 * j).action != Action::kNoAction) {
            if (lost++ == 0) {
              r.witness = {{"t", g.t(n)}, {"z", z}, {"x", g.x(i)}, {"y", g.y(z, j)},
                           {"target", sb.decision(2 * n, z, 2 * i, 2 * j).target}};
            }
          }
        }
      }
    }
  }
  r.samples = static_cast<std::size_t>(interior);
  r.passed = lost == 0;
  r.details = {{"interior_no_action_nodes", interior}, {"switched_on_refinement", lost}};
  return r;
}

CheckResult check_uniqueness(const ProblemSpec& spec, const GridConfig& base) {
  CheckResult r;
  r.name = "uniqueness";
  GridConfig a1 = base;
  a1.stepping = TimeStepping::kImplicit;
  a1.interpolation = Interpolation::kLinear;
  GridConfig b1 = base;
  b1.stepping = TimeStepping::kExplicit;
  b1.interpolation = Interpolation::kMonotoneCubic;
  const GridConfig a2 = refined(a1, 2);
  const GridConfig b2 = refined(b1, 2);
  const ValueField va1 = solve_field(spec, a1);
  const ValueField va2 = solve_field(spec, a2);
  const ValueField vb1 = solve_field(spec, b1);
  const ValueField vb2 = solve_field(spec, b2);
  const double ea = max_difference(va1, va2, 2).value;
  const double eb = max_difference(vb1, vb2, 2).value;
  const MaxDiff diff = max_difference(va2, vb2, 1);
  r.tolerance = ea + eb;
  r.passed = diff.value <= ea + eb;
  if (!r.passed) r.witness = {{"difference", diff.value}, {"at", diff.where}, {"bound", ea + eb}};
  r.details = {{"refinement_gap_implicit_linear", ea},
               {"refinement_gap_explicit_cubic", eb},
               {"scheme_difference", diff.value},
               {"scheme_difference_at", diff.where}};
  return r;
}

}  // namespace switchgrid::verify
