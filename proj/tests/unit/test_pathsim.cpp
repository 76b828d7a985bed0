#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "switchgrid/grid/export.hpp"
#include "switchgrid/grid/solver.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/pathsim/evaluate.hpp"
#include "switchgrid/pathsim/moments.hpp"
#include "switchgrid/pathsim/paths.hpp"
#include "switchgrid/pathsim/policy.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/numeric.hpp"

using namespace switchgrid;

namespace {

ProblemSpec ref1_with_market(MarketModel m) {
  auto spec = ref1_problem();
  spec.market = std::move(m);
  return spec;
}

}  // namespace

TEST(Paths, AbsorbedAtZero) {
  const auto spec = ref1_problem();
  const auto b = simulate_paths(spec, {0.0, 0.0, 1.0, 0}, PathConfig{.n_paths = 50, .dt = 0.01});
  for (double x : b.x) EXPECT_EQ(x, 0.0);
}

TEST(Paths, DeterministicOde) {
  const auto spec = ref1_with_market(capped_gbm(0.05, 0.0, 10.0));
  const auto b = simulate_paths(spec, {0.0, 1.0, 1.0, 0}, PathConfig{.n_paths = 20, .dt = 1e-3});
  for (std::size_t p = 0; p < b.n_paths; ++p) EXPECT_NEAR(b.at(p, b.steps), std::exp(0.05), 2e-3 * 0.05);
}

TEST(Paths, MartingaleWithoutDrift) {
  const auto spec = ref1_with_market(capped_gbm(0.0, 0.3, 10.0));
  const auto b = simulate_paths(spec, {0.0, 1.0, 1.0, 0}, PathConfig{.n_paths = 100000, .dt = 1e-2, .seed = 5});
  std::vector<double> xt(b.n_paths);
  for (std::size_t p = 0; p < b.n_paths; ++p) xt[p] = b.at(p, b.steps);
  const auto ms = mean_and_se(xt);
  EXPECT_LE(std::abs(ms.mean - 1.0), 3.0 * ms.se);
}

TEST(Paths, StepCount) {
  EXPECT_EQ(step_count(0.0, 1.0, 1e-3), 1000);
  EXPECT_EQ(step_count(0.5, 1.0, 0.1), 5);
  EXPECT_EQ(step_count(1.0, 1.0, 0.1), 0);
}

TEST(Paths, ThreadCountDoesNotMatter) {
  const auto spec = ref1_problem();
  PathConfig a{.n_paths = 257, .dt = 1e-2, .seed = 9, .threads = 1};
  PathConfig b = a;
  b.threads = 4;
  EXPECT_EQ(simulate_paths(spec, {0.0, 1.0, 1.0, 0}, a).x, simulate_paths(spec, {0.0, 1.0, 1.0, 0}, b).x);
}

TEST(Wealth, Step) {
  EXPECT_EQ(wealth_step({0.0, 1.0, 3.0, 0}, 0.7), 3.0);
  EXPECT_NEAR(wealth_step({0.0, 1.0, 3.0, 2}, 0.1), 3.2, 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const PortfolioState s{0.0, 5.0 + u(rng), 3.0 + u(rng), static_cast<int>(std::lround(u(rng)))};
    const double dx = u(rng) * 0.1;
    const double y1 = wealth_step(s, dx);
    EXPECT_NEAR(y1 - s.z * (s.x + dx), s.y - s.z * s.x, 1e-12);
  }
}

TEST(Switch, ApplyAndReject) {
  const auto spec = ref1_problem();
  const auto [s, ev] = apply_switch(spec, {0.0, 1.0, 1.0, 0}, 1);
  EXPECT_DOUBLE_EQ(s.y, 0.85);
  EXPECT_EQ(s.z, 1);
  EXPECT_DOUBLE_EQ(ev.cost_paid, 0.15);
  EXPECT_THROW(apply_switch(spec, {0.0, 1.0, 1.0, 0}, 0), AdmissibilityError);
  EXPECT_THROW(apply_switch(spec, {0.0, 1.0, 0.3, 0}, 2), AdmissibilityError);
}

TEST(Switch, MarginCall) {
  const auto spec = ref1_problem();
  EXPECT_FALSE(detect_margin_call(spec, {0.0, 1.0, 0.5, 0}));
  EXPECT_TRUE(detect_margin_call(spec, {0.0, 1.0, 0.15, 1}));
  EXPECT_FALSE(detect_margin_call(spec, {0.0, 1.0, 50.0, -1}));
}

TEST(Evaluate, ConstantZeroIsDeterministic) {
  const auto spec = ref1_problem();
  const ConstantPolicy zero(spec, 0);
  const auto r = evaluate_strategy(spec, zero, {0.0, 1.0, 2.25, 0}, PathConfig{.n_paths = 500, .dt = 1e-2});
  EXPECT_DOUBLE_EQ(r.mean, 1.5);
  EXPECT_EQ(r.se, 0.0);
  EXPECT_EQ(r.switches, 0u);
  EXPECT_EQ(r.horizon_stops, 500u);
}

TEST(Evaluate, StartOnFloor) {
  const auto spec = ref1_problem();
  const HoldPolicy hold;
  const auto r = evaluate_strategy(spec, hold, {0.0, 1.0, 0.15, 1}, PathConfig{.n_paths = 500, .dt = 1e-3});
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.margin_calls, 500u);
}

TEST(Evaluate, SeedReproducibility) {
  const auto spec = ref1_problem();
  const ConstantPolicy one(spec, 1);
  const PortfolioState s{0.0, 2.0, 1.0, 0};
  PathConfig cfg{.n_paths = 400, .dt = 1e-2, .seed = 42};
  const auto a = evaluate_strategy(spec, one, s, cfg).to_json().dump();
  const auto b = evaluate_strategy(spec, one, s, cfg).to_json().dump();
  EXPECT_EQ(a, b);
  cfg.threads = 3;
  EXPECT_EQ(a, evaluate_strategy(spec, one, s, cfg).to_json().dump());
  cfg.seed = 43;
  EXPECT_NE(a, evaluate_strategy(spec, one, s, cfg).to_json().dump());
}

TEST(Evaluate, AntitheticPairs) {
  const auto spec = ref1_problem();
  const ConstantPolicy one(spec, 1);
  PathConfig cfg{.n_paths = 400, .dt = 1e-2, .seed = 3, .antithetic = true};
  const auto r = evaluate_strategy(spec, one, {0.0, 2.0, 1.0, 0}, cfg);
  EXPECT_TRUE(r.antithetic);
  EXPECT_GT(r.se, 0.0);
  EXPECT_LE(r.ci_low, r.mean);
  EXPECT_GE(r.ci_high, r.mean);
}

TEST(Evaluate, PathDump) {
  const auto spec = ref1_problem();
  const ConstantPolicy one(spec, 1);
  std::vector<PathSample> dump;
  evaluate_strategy(spec, one, {0.0, 2.0, 1.0, 0}, PathConfig{.n_paths = 10, .dt = 0.1}, &dump, 2);
  ASSERT_FALSE(dump.empty());
  for (const auto& s : dump) EXPECT_LT(s.path, 2u);
  std::stringstream ss;
  write_path_dump_csv(ss, dump);
  std::string head;
  std::getline(ss, head);
  EXPECT_EQ(head, "path_id,step,t,x,y,z");
}

TEST(Moments, Degenerate) {
  const auto spec = ref1_problem();
  const HoldPolicy hold;
  const PathConfig cfg{.n_paths = 200, .dt = 1e-2};
  EXPECT_EQ(moment_statistics(spec, {0.0, 0.0, 1.0, 1}, cfg, 2, hold).estimate, 0.0);
  EXPECT_EQ(moment_statistics(spec, {0.0, 3.0, 1.0, 0}, cfg, 2, hold).estimate, 0.0);
}

TEST(Moments, Coupled) {
  const auto spec = ref1_problem();
  const HoldPolicy hold;
  const PathConfig cfg{.n_paths = 200, .dt = 1e-2};
  EXPECT_EQ(coupled_paths(spec, {0.0, 2.0, 1.0, 1}, {0.0, 2.0, 1.0, 1}, cfg, 2, hold).estimate, 0.0);
  const auto c = coupled_paths(spec, {0.0, 2.0, 1.0, 0}, {0.0, 2.0, 1.5, 0}, cfg, 2, hold);
  EXPECT_DOUBLE_EQ(c.estimate, 0.25);
  EXPECT_EQ(c.se, 0.0);
}

TEST(Policy, TabulatedRoundTrip) {
  const auto spec = ref1_problem();
  const GridConfig g{.nx = 20, .ny = 20, .nt = 4};
  const auto field = solve_field(spec, g);
  const auto strat = extract_strategy(spec, g, field);
  std::stringstream csv;
  write_strategy_csv(csv, strat, ArtifactHeader{}, 1);
  const TabulatedPolicy tab(spec, csv);
  const auto& geo = field.geometry();
  EXPECT_EQ(tab.rows(), static_cast<std::size_t>(geo.nt() + 1) * (geo.nodes(-1) + geo.nodes(0) + geo.nodes(1) + geo.nodes(2)));
  for (int n = 0; n <= geo.nt(); ++n) {
    for (int z = -1; z <= 2; ++z) {
      for (int i = 0; i <= geo.nx(); i += 3) {
        for (int j = 0; j <= geo.j_hi(z); j += 2) {
          const auto d = strat.decision(n, z, i, j);
          const auto p = tab.decide({geo.t(n), geo.x(i), geo.y(z, j), z});
          EXPECT_TRUE(p.covered);
          if (d.action == Action::kSwitch) {
            ASSERT_TRUE(p.target.has_value());
            EXPECT_EQ(*p.target, d.target);
          } else {
            EXPECT_FALSE(p.target.has_value());
          }
        }
      }
    }
  }
}

TEST(Policy, TabulatedRejectsBadHeader) {
  std::stringstream csv("a,b,c\n");
  EXPECT_THROW(TabulatedPolicy(ref1_problem(), csv), ConfigError);
}

TEST(Policy, ConstantRespectsGamma) {
  const auto spec = ref1_problem();
  const ConstantPolicy two(spec, 2);
  EXPECT_FALSE(two.decide({0.0, 1.0, 0.3, 0}).target.has_value());
  EXPECT_EQ(two.decide({0.0, 1.0, 1.0, 0}).target, 2);
  EXPECT_FALSE(two.decide({0.0, 1.0, 1.0, 2}).target.has_value());
}
