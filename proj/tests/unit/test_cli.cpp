#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "switchgrid/cli/commands.hpp"
#include "switchgrid/cli/run_config.hpp"
#include "switchgrid/util/errors.hpp"

using namespace switchgrid;
using namespace switchgrid::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("switchgrid_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json small_config() {
  std::ifstream in(fs::path(SWITCHGRID_SOURCE_DIR) / "configs" / "ref1.json");
  auto doc = nlohmann::json::parse(in);
  doc["grid"] = {{"nx", 20}, {"ny", 20}, {"nt", 4}};
  doc["paths"] = {{"n_paths", 300}, {"dt", 0.01}};
  doc.erase("output");
  return doc;
}

RunConfig config_in(nlohmann::json doc, const fs::path& out) {
  doc["output"] = {{"dir", out.string()}};
  return parse_config_json(doc);
}

std::string key_of(const nlohmann::json& doc) {
  try {
    parse_config_json(doc);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST(ParseConfig, BundledRef1) {
  const auto cfg = parse_config(fs::path(SWITCHGRID_SOURCE_DIR) / "configs" / "ref1.json");
  EXPECT_EQ(spec_hash(cfg.problem), spec_hash(ref1_problem()));
  EXPECT_EQ(cfg.grid.nx, 200);
  EXPECT_EQ(cfg.grid.nt, 50);
  EXPECT_EQ(cfg.paths.n_paths, 100000u);
  EXPECT_EQ(cfg.seed, 0u);
  EXPECT_EQ(cfg.simulate.policy, PolicyKind::kExtracted);
}

TEST(ParseConfig, ErrorsNameKeys) {
  auto doc = small_config();
  doc["positions"]["c2"] = -1;
  EXPECT_EQ(key_of(doc), "positions.c2");

  doc = small_config();
  doc["grid"]["nt"] = "ten";
  EXPECT_EQ(key_of(doc), "grid.nt");

  doc = small_config();
  doc["paths"]["dt"] = -1.0;
  EXPECT_EQ(key_of(doc), "paths.dt");

  doc = small_config();
  doc["verify"] = {{"only", {"s_properties", "bogus"}}};
  EXPECT_EQ(key_of(doc), "verify.only");

  doc = small_config();
  doc["typo"] = 1;
  EXPECT_EQ(key_of(doc), "typo");

  doc = small_config();
  doc["simulate"] = {{"policy", "magic"}};
  EXPECT_EQ(key_of(doc), "simulate.policy");

  doc = small_config();
  doc["seed"] = -4;
  EXPECT_EQ(key_of(doc), "seed");

  doc = small_config();
  doc.erase("horizon");
  EXPECT_EQ(key_of(doc), "horizon");
}

TEST(ParseConfig, ProblemFromFile) {
  const auto dir = scratch("problem_file");
  fs::create_directories(dir);
  auto doc = small_config();
  nlohmann::json problem;
  for (const char* k : {"market", "cost", "utility", "positions", "horizon"}) {
    problem[k] = doc[k];
    doc.erase(k);
  }
  std::ofstream(dir / "p.json") << problem.dump();
  doc["problem"] = "p.json";
  std::ofstream(dir / "run.json") << doc.dump();
  const auto cfg = parse_config(dir / "run.json");
  EXPECT_EQ(spec_hash(cfg.problem), spec_hash(ref1_problem()));
  EXPECT_EQ(cfg.output_dir, dir / "out");

  doc["problem"] = "missing.json";
  std::ofstream(dir / "run.json") << doc.dump();
  try {
    parse_config(dir / "run.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "problem");
  }
}

TEST(ParseConfig, OverridesAndThreads) {
  auto cfg = parse_config_json(small_config());
  Overrides o;
  o.seed = 17;
  o.threads = 3;
  o.only = {"dominance"};
  apply_overrides(cfg, o);
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_EQ(cfg.grid.threads, 3);
  EXPECT_EQ(cfg.paths.threads, 3);
  EXPECT_EQ(cfg.verify.seed, 17u);
  EXPECT_EQ(cfg.verify.only, std::vector<std::string>{"dominance"});

  ::setenv("SWITCHGRID_THREADS", "2", 1);
  auto env = parse_config_json(small_config());
  EXPECT_EQ(env.threads, 2);
  ::unsetenv("SWITCHGRID_THREADS");

  o = {};
  o.axes = {"sideways"};
  EXPECT_THROW(apply_overrides(cfg, o), ConfigError);
}

TEST(Commands, SolveArtifactsAndSeedEcho) {
  const auto out = scratch("solve");
  std::stringstream log;
  ASSERT_EQ(cmd_solve(config_in(small_config(), out), log), kExitOk);
  for (const char* f : {"value.csv", "strategy.csv", "residuals.json", "timing.json"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto res = nlohmann::json::parse(slurp(out / "residuals.json"));
  EXPECT_EQ(res.at("header").at("seed"), 0);
  EXPECT_NE(slurp(out / "value.csv").find("seed=0"), std::string::npos);
}

TEST(Commands, SolveNoTradeMatchesUtility) {
  const auto out = scratch("solve_k0");
  auto doc = small_config();
  doc["positions"] = {{"c2", 0}, {"c3", 0}};
  std::stringstream log;
  ASSERT_EQ(cmd_solve(config_in(doc, out), log), kExitOk);
  std::ifstream in(out / "value.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    double t, x, y, v;
    int z;
    char c;
    std::stringstream ss(line);
    ss >> t >> c >> x >> c >> y >> c >> z >> c >> v;
    ASSERT_NEAR(v, std::sqrt(y), 1e-12) << line;
    ++rows;
  }
  EXPECT_GT(rows, 0);
}

TEST(Commands, ForcedNonConvergence) {
  const auto out = scratch("noconv");
  auto doc = small_config();
  doc["grid"]["max_intervention_iters"] = 0;
  std::stringstream log;
  EXPECT_EQ(run_command("solve", config_in(doc, out), log), kExitFailure);
  const auto err = nlohmann::json::parse(slurp(out / "error.json"));
  EXPECT_EQ(err.at("kind"), "non_convergence");
  EXPECT_TRUE(err.at("witness").contains("time_index"));
}

TEST(Commands, SimulateConstantAndDeterminism) {
  const auto out = scratch("sim_const");
  auto doc = small_config();
  doc["simulate"] = {{"policy", "constant"}, {"z", 0}, {"start", {{"x", 1.0}, {"y", 2.25}}}};
  std::stringstream log;
  ASSERT_EQ(cmd_simulate(config_in(doc, out), log), kExitOk);
  const auto ev = nlohmann::json::parse(slurp(out / "eval.json"));
  EXPECT_DOUBLE_EQ(ev.at("report").at("mean").get<double>(), 1.5);
  EXPECT_EQ(ev.at("report").at("se").get<double>(), 0.0);

  doc["simulate"] = {{"policy", "constant"}, {"z", 1}, {"start", {{"x", 2.0}, {"y", 1.0}}}};
  const auto a = scratch("sim_a");
  const auto b = scratch("sim_b");
  ASSERT_EQ(cmd_simulate(config_in(doc, a), log), kExitOk);
  auto cfg_b = config_in(doc, b);
  Overrides o;
  o.threads = 4;
  apply_overrides(cfg_b, o);
  ASSERT_EQ(cmd_simulate(cfg_b, log), kExitOk);
  EXPECT_EQ(slurp(a / "eval.json"), slurp(b / "eval.json"));
}

TEST(Commands, SimulateFromStrategyCsv) {
  const auto out = scratch("sim_csv");
  auto doc = small_config();
  std::stringstream log;
  EXPECT_EQ(run_command("simulate", config_in([&] {
                          auto d = doc;
                          d["simulate"] = {{"policy", "csv"}};
                          return d;
                        }(),
                                              out),
                        log),
            kExitFailure);
  ASSERT_EQ(cmd_solve(config_in(doc, out), log), kExitOk);
  doc["simulate"] = {{"policy", "csv"}};
  EXPECT_EQ(run_command("simulate", config_in(doc, out), log), kExitOk);
  const auto ev = nlohmann::json::parse(slurp(out / "eval.json"));
  EXPECT_EQ(ev.at("policy").at("kind"), "csv");
}

TEST(Commands, VerifyOnlyAndInjectedDefect) {
  const auto out = scratch("verify");
  auto doc = small_config();
  doc["verify"] = {{"s_trials", 50}, {"s_grid", {{"nx", 10}, {"ny", 10}, {"nt", 2}}}};
  auto cfg = config_in(doc, out);
  Overrides o;
  o.only = {"s_properties"};
  apply_overrides(cfg, o);
  std::stringstream log;
  EXPECT_EQ(run_command("verify", cfg, log), kExitOk);
  const auto checks = nlohmann::json::parse(slurp(out / "checks.json"));
  ASSERT_EQ(checks.at("checks").size(), 1u);
  EXPECT_EQ(checks.at("checks")[0].at("name"), "s_properties");
  EXPECT_FALSE(checks.at("checks")[0].contains("wall_time"));
  EXPECT_TRUE(nlohmann::json::parse(slurp(out / "timing.json")).contains("s_properties"));

  doc["cost"] = {{"kind", "table"}, {"table", {1.0, 0.5, 0.3, 0.0, 0.3, 0.5, 1.0}}};
  doc["verify"] = {{"only", {"validate_spec"}}, {"validation_samples", 100}};
  std::stringstream log2;
  EXPECT_EQ(run_command("verify", config_in(doc, out), log2), kExitFailure);
  EXPECT_NE(log2.str().find("cost_subadditive"), std::string::npos) << log2.str();
  EXPECT_NE(log2.str().find("z1=1 z2=2"), std::string::npos) << log2.str();
}

TEST(Commands, SweepEpsilonMonotone) {
  const auto out = scratch("sweep");
  auto doc = small_config();
  doc["sweep"] = {{"axes", {"epsilon"}}};
  std::stringstream log;
  ASSERT_EQ(run_command("sweep", config_in(doc, out), log), kExitOk);
  std::ifstream in(out / "sweep.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "axis,axis_value,metric,value");
  std::vector<double> h;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string axis, value, metric, result;
    std::getline(ss, axis, ',');
    std::getline(ss, value, ',');
    std::getline(ss, metric, ',');
    std::getline(ss, result, ',');
    EXPECT_EQ(axis, "epsilon");
    if (metric == "h") h.push_back(std::stod(result));
    if (metric == "order_violations" || metric == "bound_violations") EXPECT_EQ(result, "0");
  }
  ASSERT_EQ(h.size(), 4u);
  for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LT(h[k], h[k - 1]);
}

TEST(Commands, SweepGridAndDt) {
  const auto out = scratch("sweep_grid");
  auto doc = small_config();
  doc["sweep"] = {{"axes", {"grid", "dt"}}, {"nx_list", {10, 20}}, {"dt_list", {1e-2, 1e-3}}, {"exit_paths", 200}};
  std::stringstream log;
  ASSERT_EQ(run_command("sweep", config_in(doc, out), log), kExitOk);
  const auto body = slurp(out / "sweep.csv");
  EXPECT_NE(body.find("grid,10,residual_linf,"), std::string::npos);
  EXPECT_NE(body.find("grid,20,dx,1\n"), std::string::npos);
  EXPECT_NE(body.find("dt,0.001,crossing_probability,"), std::string::npos);
}
