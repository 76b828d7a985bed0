#include <cmath>

#include <gtest/gtest.h>

#include "switchgrid/grid/solver.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/hash.hpp"
#include "switchgrid/verify/checks.hpp"
#include "switchgrid/verify/report.hpp"

using namespace switchgrid;
using namespace switchgrid::verify;

namespace {

ProblemSpec no_trade_problem() {
  return make_problem(capped_gbm(0.05, 0.3, 10.0), CostFunction::fixed_plus_proportional(0.1, 0.05, 0),
                      power_utility(0.5), {0, 0}, 1.0);
}

ProblemSpec ref1_with_market(MarketModel m) {
  auto spec = ref1_problem();
  spec.market = std::move(m);
  return spec;
}

const GridConfig kSmall{.nx = 40, .ny = 40, .nt = 10};

}  // namespace

TEST(RunningSup, Examples) {
  std::vector<double> x, sq, k, id;
  for (int i = 0; i <= 100; ++i) {
    x.push_back(i);
    sq.push_back(std::sqrt(i));
    k.push_back(3.0);
    id.push_back(i);
  }
  const auto a = running_sup_ratio(x, sq);
  EXPECT_DOUBLE_EQ(a.ratio.back(), 0.1);
  EXPECT_EQ(a.ratio.front(), 0.0);
  EXPECT_TRUE(a.sublinear);
  const auto b = running_sup_ratio(x, k);
  EXPECT_DOUBLE_EQ(b.ratio.back(), 0.03);
  EXPECT_TRUE(b.sublinear);
  const auto c = running_sup_ratio(x, id);
  for (std::size_t i = 1; i < c.ratio.size(); ++i) EXPECT_DOUBLE_EQ(c.ratio[i], 1.0);
  EXPECT_FALSE(c.sublinear);
}

TEST(RunningSup, PrefixMaximum) {
  const auto t = running_sup_ratio({0, 1, 2, 3}, {0, 2, 1, 4});
  EXPECT_EQ(t.running_sup, (std::vector<double>{0, 2, 2, 4}));
}

TEST(Checks, ValidateSpecWitness) {
  auto spec = ref1_problem();
  spec.cost = CostFunction::tabulate(3, [](int z) { return static_cast<double>(z) * z; });
  const auto r = check_validate_spec(spec, 1000, 0);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.witness.at("entry"), "cost_subadditive");
}

TEST(Checks, SPropertiesRef1) {
  const auto r = check_s_properties(ref1_problem(), GridConfig{.nx = 10, .ny = 10, .nt = 2}, 500, 1);
  EXPECT_TRUE(r.passed) << r.witness.dump();
  EXPECT_EQ(r.seed, 1u);
}

TEST(Checks, StrictSupersolutionGap) {
  const auto r = check_strict_supersolution_gap(ref1_problem(), kSmall);
  EXPECT_TRUE(r.passed) << r.witness.dump();
  EXPECT_DOUBLE_EQ(r.details.at("rho").get<double>(), 0.075);
  EXPECT_NEAR(r.details.at("C5").get<double>(), 1.65, 1e-12);
  EXPECT_GE(r.details.at("min_jump_gap").get<double>(), 0.15 - 1e-12);
  EXPECT_THROW(check_strict_supersolution_gap(ref1_with_market(gbm(0.05, 0.3)), kSmall), ConfigError);
}

TEST(Checks, SolvedFieldPassesFieldChecks) {
  const auto spec = ref1_problem();
  const auto field = solve_field(spec, kSmall);
  EXPECT_TRUE(check_dominance(spec, kSmall, field).passed);
  EXPECT_TRUE(check_boundary_data(spec, field).passed);
  EXPECT_TRUE(check_residual(spec, kSmall, field, 1.0).passed);
}

TEST(Checks, CorruptedFieldFails) {
  const auto spec = ref1_problem();
  auto field = solve_field(spec, kSmall);
  // Dent the z = 0 slice near y = 5 so that switching beats holding there.
  const auto& g = field.geometry();
  for (int n = 0; n < g.nt(); ++n) {
    for (int i = 8; i <= 32; ++i) {
      for (int j = 16; j <= 24; ++j) field.slice(n).at(0, i, j) *= 0.5;
    }
  }
  const auto dom = check_dominance(spec, kSmall, field);
  EXPECT_FALSE(dom.passed);
  EXPECT_FALSE(dom.witness.is_null());
  const auto res = check_residual(spec, kSmall, field, 1e-3);
  EXPECT_FALSE(res.passed);
  EXPECT_FALSE(res.witness.is_null());

  field.slice(g.nt()).at(1, 3, 0) = 0.5;
  EXPECT_FALSE(check_boundary_data(spec, field).passed);
}

TEST(Checks, SublinearEdgesNoTrade) {
  const auto spec = no_trade_problem();
  GridConfig g{.nx = 20, .ny = 20, .nt = 4};
  GridConfig g2 = g;
  g2.nx *= 2;
  g2.ny *= 2;
  g2.x_max *= 2;
  g2.y_max *= 2;
  const auto r = check_sublinear_edges(spec, g, solve_field(spec, g), solve_field(spec, g2));
  EXPECT_TRUE(r.passed) << r.witness.dump();
  for (const auto& e : r.details.at("ratios")) {
    if (e.at("edge") != "x") continue;
    EXPECT_NEAR(e.at("ratio_doubled").get<double>(), 0.5 * e.at("ratio").get<double>(), 1e-12);
  }
}

TEST(Checks, PenaltySmallGrid) {
  const auto r = check_penalty_convergence(ref1_problem(), kSmall, {1e-1, 1e-2, 1e-3});
  EXPECT_EQ(r.details.at("bound_violations").get<long>(), 0);
  EXPECT_EQ(r.details.at("order_violations").get<long>(), 0);
}

TEST(Checks, ImmediateExitDeterministicCases) {
  ExitConfig cfg{.dt_list = {1e-2, 1e-3}, .delta = 0.01, .paths = 200, .level = 0.9};
  // Price pushed down: a long position loses wealth at once.
  const auto down = ref1_with_market(capped_gbm(-5.0, 0.0, 10.0));
  const auto r = check_immediate_exit(down, {0.0, 1.0, 0.15 + 1e-6, 1}, cfg);
  for (const auto& e : r.details.at("estimates")) EXPECT_EQ(e.at("probability").get<double>(), 1.0);
  EXPECT_TRUE(r.passed);
  // Price pushed up from above the floor: no exit.
  const auto up = ref1_with_market(capped_gbm(0.05, 0.0, 10.0));
  const auto q = check_immediate_exit(up, {0.0, 1.0, 0.5, 1}, cfg);
  for (const auto& e : q.details.at("estimates")) EXPECT_EQ(e.at("probability").get<double>(), 0.0);
  EXPECT_FALSE(q.passed);
}

TEST(Checks, ItoCrossingMonotone) {
  ExitConfig cfg{.dt_list = {1e-3, 1e-4}, .delta = 0.01, .paths = 2000, .level = 0.1};
  const ItoProcess bm{[](double, double) { return 0.0; }, [](double, double) { return 1.0; }};
  const auto p = crossing_probabilities(bm, cfg);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_GE(p[1], p[0]);
  EXPECT_GT(p[1], 0.7);
}

TEST(Checks, MomentBoundsZeroStart) {
  MomentConfig cfg{.x_sweep = {0.0}, .paths = 100, .dt = 1e-2};
  cfg.coupled_d0 = 0.2;
  const auto r = check_moment_bounds(ref1_problem(), cfg);
  EXPECT_FALSE(r.details.is_null());
}

TEST(Checks, DppOneStep) {
  const auto spec = ref1_problem();
  const auto field = solve_field(spec, kSmall);
  const auto strat = extract_strategy(spec, kSmall, field);
  DppConfig cfg{.nodes = 6, .paths = 2000, .substeps = 5, .seed = 4};
  const auto r = check_dpp_onestep(spec, kSmall, field, strat, cfg);
  EXPECT_TRUE(r.passed) << r.witness.dump();
}

TEST(Checks, DppExactWithoutTrades) {
  const auto spec = [] {
    auto s = make_problem(capped_gbm(0.0, 0.3, 10.0), CostFunction::fixed_plus_proportional(0.1, 0.05, 0),
                          power_utility(0.5), {0, 0}, 1.0);
    return s;
  }();
  const auto field = solve_field(spec, kSmall);
  const auto strat = extract_strategy(spec, kSmall, field);
  const auto r = check_dpp_onestep(spec, kSmall, field, strat, DppConfig{.nodes = 5, .paths = 100, .substeps = 2});
  EXPECT_TRUE(r.passed);
}

TEST(Report, OnlyFilterAndUnknownName) {
  VerifyConfig cfg;
  cfg.only = {"validate_spec", "strict_supersolution_gap"};
  cfg.validation_samples = 200;
  cfg.grid = kSmall;
  const auto rs = full_report(ref1_problem(), cfg);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].name, "validate_spec");
  EXPECT_EQ(rs[1].name, "strict_supersolution_gap");
  EXPECT_TRUE(all_passed(rs));
  EXPECT_EQ(rs[0].seed, child_seed(0, "validate_spec"));

  cfg.only = {"no_such_check"};
  EXPECT_THROW(full_report(ref1_problem(), cfg), ConfigError);
}

TEST(Report, JsonExcludesWallTime) {
  CheckResult r;
  r.name = "x";
  r.passed = true;
  r.wall_time = 3.5;
  const auto j = r.to_json();
  EXPECT_FALSE(j.contains("wall_time"));
  EXPECT_EQ(j.at("pass"), true);
  const auto t = timing_json({r});
  EXPECT_DOUBLE_EQ(t.at("x").get<double>(), 3.5);
  EXPECT_EQ(report_json({r}).at("pass"), true);
}

TEST(Report, DefaultSetOmitsRefinement) {
  const auto names = default_check_names();
  EXPECT_EQ(std::find(names.begin(), names.end(), "residual_refinement"), names.end());
  EXPECT_EQ(names.size() + 1, check_names().size());
}

TEST(Report, NonSubadditiveCostSurfaces) {
  auto spec = ref1_problem();
  spec.cost = CostFunction(3, {1.0, 0.5, 0.3, 0.0, 0.3, 0.5, 1.0});
  VerifyConfig cfg;
  cfg.only = {"validate_spec"};
  cfg.validation_samples = 200;
  const auto rs = full_report(spec, cfg);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_FALSE(all_passed(rs));
  EXPECT_NE(rs[0].witness.dump().find("z1="), std::string::npos);
}
