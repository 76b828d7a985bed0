#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "switchgrid/grid/export.hpp"
#include "switchgrid/grid/operators.hpp"
#include "switchgrid/grid/residual.hpp"
#include "switchgrid/grid/solver.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/util/errors.hpp"

using namespace switchgrid;

namespace {

ProblemSpec no_trade_problem() {
  return make_problem(capped_gbm(0.05, 0.3, 10.0), CostFunction::fixed_plus_proportional(0.1, 0.05, 0),
                      power_utility(0.5), {0, 0}, 1.0);
}

GridConfig small_grid() { return GridConfig{.nx = 40, .ny = 40, .nt = 10}; }

}  // namespace

TEST(Grid, RejectsNonIntegerShear) {
  GridConfig g{.nx = 30, .ny = 20, .nt = 4};
  try {
    make_geometry(ref1_problem(), g, SolveKind::kConstrained);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "grid");
  }
  GridConfig bad = small_grid();
  bad.stepping = TimeStepping::kImplicit;
  auto doc = to_json(bad);
  doc["nx"] = -3;
  try {
    grid_from_json(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "grid.nx");
  }
}

TEST(Grid, GeometryLayout) {
  const auto spec = ref1_problem();
  const auto g = make_geometry(spec, small_grid(), SolveKind::kConstrained);
  EXPECT_EQ(g->shear(), 2);
  EXPECT_DOUBLE_EQ(g->dx(), 0.5);
  EXPECT_DOUBLE_EQ(g->dy(), 0.25);
  for (int z = -1; z <= 2; ++z) {
    EXPECT_DOUBLE_EQ(g->y(z, 0), spec.cost(-z));
    EXPECT_LE(g->y_top(z), 10.0 + 1e-12);
  }
  const auto p = make_geometry(spec, small_grid(), SolveKind::kPenalized);
  EXPECT_EQ(p->j_lo(), -4);
}

TEST(Grid, HashAndJson) {
  const auto g = small_grid();
  EXPECT_EQ(grid_hash(g), grid_hash(grid_from_json(to_json(g))));
  GridConfig t = g;
  t.threads = 8;
  EXPECT_EQ(grid_hash(g), grid_hash(t));
  t.nt = 11;
  EXPECT_NE(grid_hash(g), grid_hash(t));
}

TEST(Grid, TerminalCondition) {
  const auto spec = ref1_problem();
  GridConfig g{.nx = 20, .ny = 200, .nt = 4, .x_max = 20.0, .y_max = 10.0};
  const auto term = terminal_condition(spec, g);
  const auto& geo = term.geometry();
  for (int z = -1; z <= 2; ++z) EXPECT_EQ(term.at(z, 3, 0), 0.0);
  // y = 4.15 on z = 1 is row 80.
  ASSERT_NEAR(geo.y(1, 80), 4.15, 1e-12);
  EXPECT_NEAR(term.at(1, 5, 80), 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(term.at(0, 0, 20), 1.0);
}

TEST(Operators, Generator) {
  const auto spec = ref1_problem();
  const PortfolioState s{0.2, 3.0, 1.0, 2};
  EXPECT_EQ(generator_apply(spec, {}, s), 0.0);
  const double b = spec.market.drift(s.t, s.x);
  EXPECT_DOUBLE_EQ(generator_apply(spec, {.y = 1.0}, s), s.z * b);
  EXPECT_NEAR(generator_apply(spec, {.x = -static_cast<double>(s.z), .y = 1.0}, s), 0.0, 1e-15);
}

TEST(Operators, HjbResidual) {
  const auto spec = ref1_problem();
  const PortfolioState s{0.0, 12.0, 2.0, -1};
  EXPECT_EQ(hjb_residual(spec, 0.0, {0.0, 0.0}, {}, s), 0.0);
  EXPECT_EQ(hjb_residual(spec, 1.0, {0.0, 0.0}, {}, s), -1.0);
  EXPECT_DOUBLE_EQ(hjb_residual(spec, 0.0, {0.0, 1.0}, {}, s), -generator_apply(spec, {.y = 1.0}, s));
}

TEST(Operators, InterventionOnLinearField) {
  const auto spec = ref1_problem();
  const auto geo = make_geometry(spec, small_grid(), SolveKind::kConstrained);
  FieldSlice f(geo);
  for (int z = -1; z <= 2; ++z) {
    for (int i = 0; i <= geo->nx(); ++i) {
      for (int j = geo->j_lo(); j <= geo->j_hi(z); ++j) f.at(z, i, j) = geo->y(z, j);
    }
  }
  const int j = 4;  // y = 1 on z = 0
  ASSERT_DOUBLE_EQ(geo->y(0, j), 1.0);
  const auto r = apply_intervention(spec, f, 0, 3, j);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(r->value, 0.85, 1e-12);
  EXPECT_EQ(r->target, -1);  // tie with +1, smallest target wins

  // y = 0.25 on z = 0: nothing admissible.
  EXPECT_FALSE(apply_intervention(spec, f, 0, 3, 1).has_value());
}

TEST(Operators, InterventionOnConstantField) {
  const auto spec = ref1_problem();
  const auto geo = make_geometry(spec, small_grid(), SolveKind::kConstrained);
  FieldSlice f(geo);
  for (int z = -1; z <= 2; ++z) std::fill(f.values(z).begin(), f.values(z).end(), 0.7);
  const auto r = apply_intervention(spec, f, 1, 5, 20);
  ASSERT_TRUE(r.has_value());
  EXPECT_DOUBLE_EQ(r->value, 0.7);
}

TEST(Stepper, NoTradeFieldInvariant) {
  const auto spec = no_trade_problem();
  const auto g = small_grid();
  const auto term = terminal_condition(spec, g);
  const auto prev = step_backward(spec, g, term, g.nt - 1);
  const auto& geo = term.geometry();
  for (int i = 0; i <= geo.nx(); ++i) {
    for (int j = 0; j <= geo.j_hi(0); ++j) EXPECT_NEAR(prev.at(0, i, j), term.at(0, i, j), 1e-14);
  }
}

TEST(Stepper, ConstantFieldWithoutTrades) {
  const auto spec = no_trade_problem();
  const auto g = small_grid();
  const auto geo = make_geometry(spec, g, SolveKind::kConstrained);
  FieldSlice k(geo);
  std::fill(k.values(0).begin(), k.values(0).end(), 1.5);
  const auto prev = step_backward(spec, g, k, g.nt - 1);
  for (int i = 0; i <= geo->nx(); ++i) {
    for (int j = 1; j <= geo->j_hi(0); ++j) EXPECT_NEAR(prev.at(0, i, j), 1.5, 1e-13);
  }
}

TEST(Stepper, FloorStaysZero) {
  const auto spec = ref1_problem();
  const auto g = small_grid();
  const auto term = terminal_condition(spec, g);
  const auto prev = step_backward(spec, g, term, g.nt - 1);
  for (int z : {-1, 1, 2}) {
    for (int i = 0; i <= prev.geometry().nx(); ++i) EXPECT_EQ(prev.at(z, i, 0), 0.0);
  }
}

TEST(Solver, NoTradeClosedForm) {
  const auto spec = no_trade_problem();
  const auto g = small_grid();
  const auto sol = solve_qvi(spec, g);
  const auto& geo = sol.field.geometry();
  double worst = 0.0;
  for (int n = 0; n <= geo.nt(); ++n) {
    for (int i = 0; i <= geo.nx(); ++i) {
      for (int j = 0; j <= geo.j_hi(0); ++j) {
        worst = std::max(worst, std::abs(sol.field.at(n, 0, i, j) - std::sqrt(geo.y(0, j))));
      }
    }
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_LE(sol.residuals.linf, 1e-12);
  EXPECT_EQ(sol.residuals.violations, 0);
}

TEST(Solver, IterationBudgetZeroFails) {
  auto g = small_grid();
  g.max_intervention_iters = 0;
  try {
    solve_qvi(ref1_problem(), g);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_GE(e.worst().time_index, 0);
    EXPECT_GT(e.worst().change, 0.0);
  }
}

TEST(Solver, PenalizedBoundaryDecreases) {
  const auto spec = ref1_problem();
  const auto g = small_grid();
  const auto v = solve_field(spec, g);
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto pen = solve_penalized(spec, g, eps);
    const auto& geo = pen.geometry();
    double floor_max = 0.0;
    for (int n = 0; n <= geo.nt(); ++n) {
      for (int z : {-1, 1, 2}) {
        for (int i = 0; i <= geo.nx(); ++i) floor_max = std::max(floor_max, pen.at(n, z, i, 0));
      }
    }
    EXPECT_LT(floor_max, prev);
    prev = floor_max;
    for (int n = 0; n <= geo.nt(); ++n) {
      for (int z = -1; z <= 2; ++z) {
        for (int i = 0; i <= geo.nx(); ++i) {
          for (int j = 0; j <= geo.j_hi(z); ++j) EXPECT_LE(v.at(n, z, i, j), pen.at(n, z, i, j) + 1e-10);
        }
      }
    }
  }
}

TEST(Strategy, TerminalClearsAndEmptyGammaHolds) {
  const auto spec = ref1_problem();
  const auto g = small_grid();
  const auto field = solve_field(spec, g);
  const auto strat = extract_strategy(spec, g, field);
  const auto& geo = field.geometry();
  for (int z : {-1, 1, 2}) {
    for (int i = 0; i <= geo.nx(); ++i) {
      for (int j = 0; j <= geo.j_hi(z); ++j) {
        const double y = geo.y(z, j);
        const auto d = strat.decision(g.nt, z, i, j);
        if (in_gamma(spec, y, z, 0)) {
          EXPECT_EQ(d.action, Action::kSwitch);
          EXPECT_EQ(d.target, 0);
        }
      }
    }
  }
  for (int n = 0; n <= g.nt; ++n) {
    for (int z = -1; z <= 2; ++z) {
      for (int i = 0; i <= geo.nx(); ++i) {
        for (int j = 0; j <= geo.j_hi(z); ++j) {
          if (gamma_set(spec, geo.y(z, j), z).empty()) {
            EXPECT_EQ(strat.decision(n, z, i, j).action, Action::kNoAction);
          }
        }
      }
    }
  }
}

TEST(Strategy, MatchesBruteForceNearFloor) {
  const auto spec = ref1_problem();
  const auto g = small_grid();
  const auto field = solve_field(spec, g);
  const auto strat = extract_strategy(spec, g, field);
  const auto& geo = field.geometry();
  const int z = 2;
  const auto& slice = field.slice(0);
  for (int i = 0; i <= geo.nx(); ++i) {
    for (int j = 1; j <= 8; ++j) {
      const double y = geo.y(z, j);
      std::optional<double> best;
      int arg = 0;
      for (int t : gamma_set(spec, y, z)) {
        const double v = slice.interpolate(t, geo.x(i), y - spec.cost(t - z));
        if (!best || v > *best + 1e-14) {
          best = v;
          arg = t;
        }
      }
      const auto d = strat.decision(0, z, i, j);
      if (!best) {
        EXPECT_EQ(d.action, Action::kNoAction);
        continue;
      }
      const double gap = slice.at(z, i, j) - *best;
      if (gap > g.strict_tol + 1e-12) {
        EXPECT_EQ(d.action, Action::kNoAction) << "i=" << i << " j=" << j;
      } else if (gap < g.strict_tol - 1e-12) {
        EXPECT_EQ(d.action, Action::kSwitch) << "i=" << i << " j=" << j;
        const double chosen = slice.interpolate(d.target, geo.x(i), y - spec.cost(d.target - z));
        EXPECT_NEAR(chosen, *best, 1e-12) << "target " << d.target << " vs " << arg;
      }
    }
  }
}

TEST(Residual, WrongFieldFlagged) {
  const auto spec = ref1_problem();
  const auto g = small_grid();
  const auto geo = make_geometry(spec, g, SolveKind::kConstrained);
  // Terminal data scaled down away from the horizon: V_t > 0 where holding is strict.
  ValueField wrong(geo, g, {spec_hash(spec), grid_hash(g), SolveKind::kConstrained, 0.0});
  const auto term = terminal_condition(spec, geo);
  for (int n = 0; n <= g.nt; ++n) {
    wrong.slice(n) = term;
    const double f = 1.0 - 0.5 * (spec.horizon - geo->t(n));
    for (int z = -1; z <= 2; ++z) {
      for (double& v : wrong.slice(n).values(z)) v *= f;
    }
  }
  const auto bad = qvi_residual_report(spec, g, wrong);
  const auto good = qvi_residual_report(spec, g, solve_field(spec, g));
  EXPECT_GT(bad.linf, 0.3);
  EXPECT_GT(bad.linf, 5.0 * good.linf);
  EXPECT_EQ(good.violations, 0);
}

TEST(Export, CsvFormats) {
  const auto spec = no_trade_problem();
  GridConfig g{.nx = 4, .ny = 4, .nt = 2, .x_max = 2.0, .y_max = 2.0};
  const auto sol = solve_qvi(spec, g);
  const ArtifactHeader h{spec_hash(spec), grid_hash(g), 0};
  std::stringstream ss;
  write_value_csv(ss, sol.field, h, 1);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line.rfind("# switchgrid", 0), 0u);
  EXPECT_NE(line.find("seed=0"), std::string::npos);
  std::getline(ss, line);
  EXPECT_EQ(line, "t,x,y,z,value");
  int rows = 0;
  while (std::getline(ss, line)) {
    std::stringstream cells(line);
    std::string t, x, y, z, v;
    std::getline(cells, t, ',');
    std::getline(cells, x, ',');
    std::getline(cells, y, ',');
    std::getline(cells, z, ',');
    std::getline(cells, v, ',');
    EXPECT_EQ(z, "0");
    EXPECT_NEAR(std::stod(v), std::sqrt(std::stod(y)), 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, 3 * 5 * 5);

  std::stringstream st;
  write_strategy_csv(st, extract_strategy(spec, g, sol.field), h, 2);
  std::getline(st, line);
  std::getline(st, line);
  EXPECT_EQ(line, "t,x,y,z,action,target_z");
  std::getline(st, line);
  EXPECT_EQ(line, "0,0,0,0,NO_ACTION,0");

  const auto j = residual_json(sol.residuals, g, h);
  EXPECT_EQ(j.at("artifact"), "residuals");
  EXPECT_TRUE(j.at("report").contains("linf"));
  EXPECT_TRUE(j.at("header").contains("spec_hash"));
}

TEST(Export, FormatReal) {
  EXPECT_EQ(format_real(0.0), "0");
  EXPECT_EQ(format_real(-0.0), "0");
  EXPECT_EQ(format_real(0.5), "0.5");
  EXPECT_EQ(std::stod(format_real(0.1)), 0.1);
}
