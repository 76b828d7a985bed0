#include <algorithm>
#include <chrono>
#include <optional>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "switchgrid/grid/solver.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/hash.hpp"
#include "switchgrid/verify/report.hpp"

namespace switchgrid::verify {

nlohmann::json CheckResult::to_json() const {
  nlohmann::json j = {{"name", name},     {"pass", passed},   {"tolerance", tolerance},
                      {"witness", witness}, {"seed", seed},   {"samples", samples},
                      {"details", details}, {"warnings", warnings}};
  return j;
}

std::vector<std::string> check_names() {
  return {"validate_spec",        "s_properties",       "strict_supersolution_gap",
          "boundary_data",        "dominance",          "qvi_residual",
          "dpp_onestep",          "penalty_convergence", "sublinear_edges",
          "residual_refinement",  "continuity_refinement", "no_action_openness",
          "uniqueness",           "immediate_exit",     "moment_bounds",
          "pde_mc"};
}

std::vector<std::string> default_check_names() {
  auto names = check_names();
  names.erase(std::remove(names.begin(), names.end(), "residual_refinement"), names.end());
  return names;
}

std::vector<CheckResult> full_report(const ProblemSpec& spec, const VerifyConfig& cfg) {
  const auto defaults = default_check_names();
  for (const auto& name : cfg.only) {
    const auto all = check_names();
    if (std::find(all.begin(), all.end(), name) == all.end()) {
      throw ConfigError("verify.only", "unknown check '" + name + "'");
    }
  }
  auto selected = [&](const std::string& name) {
    const auto& pool = cfg.only.empty() ? defaults : cfg.only;
    return std::find(pool.begin(), pool.end(), name) != pool.end();
  };
  std::optional<ValueField> field;
  std::optional<StrategyMap> strategy;
  auto solved = [&]() -> const ValueField& {
    if (!field) field.emplace(solve_field(spec, cfg.grid));
    return *field;
  };
  auto strat = [&]() -> const StrategyMap& {
    if (!strategy) strategy.emplace(extract_strategy(spec, cfg.grid, solved()));
    return *strategy;
  };

  std::vector<CheckResult> out;
  for (const std::string& name : check_names()) {
    if (!selected(name)) continue;
    const std::uint64_t seed = child_seed(cfg.seed, name);
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    if (name == "validate_spec") {
      r = check_validate_spec(spec, cfg.validation_samples, seed);
    } else if (name == "s_properties") {
      r = check_s_properties(spec, cfg.s_grid, cfg.s_trials, seed);
    } else if (name == "strict_supersolution_gap") {
      if (!spec.market.sup_bound) {
        r.name = name;
        r.passed = true;
        r.warnings.push_back("skipped: market has no sup bound");
      } else {
        r = check_strict_supersolution_gap(spec, cfg.grid);
      }
    } else if (name == "boundary_data") {
      r = check_boundary_data(spec, solved());
    } else if (name == "dominance") {
      r = check_dominance(spec, cfg.grid, solved());
    } else if (name == "qvi_residual") {
      r = check_residual(spec, cfg.grid, solved(), cfg.residual_threshold);
    } else if (name == "dpp_onestep") {
      DppConfig d = cfg.dpp;
      d.seed = seed;
      d.threads = cfg.threads;
      r = check_dpp_onestep(spec, cfg.grid, solved(), strat(), d);
    } else if (name == "penalty_convergence") {
      std::vector<ValueField> pen;
      for (double eps : cfg.grid.epsilon_list) pen.push_back(solve_penalized(spec, cfg.grid, eps));
      r = check_penalty_convergence(solved(), pen, cfg.grid.epsilon_list, cfg.penalty);
    } else if (name == "sublinear_edges") {
      GridConfig doubled = cfg.grid;
      doubled.nx *= 2;
      doubled.ny *= 2;
      doubled.x_max *= 2;
      doubled.y_max *= 2;
      r = check_sublinear_edges(spec, cfg.grid, solved(), solve_field(spec, doubled));
    } else if (name == "residual_refinement") {
      r = check_residual_refinement(spec, cfg.refine_grid);
    } else if (name == "continuity_refinement") {
      r = check_continuity_refinement(spec, cfg.refine_grid);
    } else if (name == "no_action_openness") {
      r = check_no_action_openness(spec, cfg.refine_grid);
    } else if (name == "uniqueness") {
      r = check_uniqueness(spec, cfg.refine_grid);
    } else if (name == "immediate_exit") {
      const int z = spec.positions.contains(1) ? 1 : spec.positions.lowest();
      if (z == 0) {
        r.name = name;
        r.passed = true;
        r.warnings.push_back("skipped: no position other than 0");
      } else {
        ExitConfig e = cfg.exit;
        e.seed = seed;
        e.threads = cfg.threads;
        r = check_immediate_exit(spec, {0.0, 1.0, spec.cost(-z), z}, e);
      }
    } else if (name == "moment_bounds") {
      MomentConfig m = cfg.moments;
      m.seed = seed;
      m.threads = cfg.threads;
      r = check_moment_bounds(spec, m);
    } else if (name == "pde_mc") {
      CrossValidationConfig c = cfg.cross;
      c.seed = seed;
      c.threads = cfg.threads;
      r = check_pde_mc(spec, solved(), strat(), c);
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

nlohmann::json report_json(const std::vector<CheckResult>& results) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : results) checks.push_back(r.to_json());
  return {{"pass", all_passed(results)}, {"checks", checks}};
}

nlohmann::json timing_json(const std::vector<CheckResult>& results) {
  nlohmann::json t = nlohmann::json::object();
  for (const auto& r : results) t[r.name] = r.wall_time;
  return t;
}

void print_summary(std::ostream& out, const std::vector<CheckResult>& results) {
  for (const auto& r : results) {
    fmt::print(out, "{:<26} {}  ({:.2f} s)\n", r.name, r.passed ? "PASS" : "FAIL", r.wall_time);
    for (const auto& w : r.warnings) fmt::print(out, "    warning: {}\n", w);
    if (!r.passed && !r.witness.is_null()) fmt::print(out, "    witness: {}\n", r.witness.dump());
  }
  fmt::print(out, "{}\n", all_passed(results) ? "all checks passed" : "some checks failed");
}

}  // namespace switchgrid::verify
