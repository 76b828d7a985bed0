#include "switchgrid/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "switchgrid/grid/export.hpp"
#include "switchgrid/grid/solver.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/pathsim/evaluate.hpp"
#include "switchgrid/pathsim/policy.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/hash.hpp"
#include "switchgrid/verify/checks.hpp"
#include "switchgrid/verify/report.hpp"

namespace switchgrid::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ArtifactHeader header_for(const RunConfig& cfg, const GridConfig& grid) {
  ArtifactHeader h;
  h.spec_hash = spec_hash(cfg.problem);
  h.grid_hash = grid_hash(grid);
  h.seed = cfg.seed;
  return h;
}

void prepare_output(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir)) {
    throw ConfigError("output.dir", "cannot create '" + cfg.output_dir.string() + "': " + ec.message());
  }
}

std::ofstream open_artifact(const RunConfig& cfg, const std::string& name) {
  const fs::path file = cfg.output_dir / name;
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("output.dir", "cannot write '" + file.string() + "'");
  return out;
}

void write_json(const RunConfig& cfg, const std::string& name, const nlohmann::json& doc) {
  auto out = open_artifact(cfg, name);
  out << doc.dump(2) << '\n';
}

nlohmann::json state_json(const PortfolioState& s) {
  return {{"t", s.t}, {"x", s.x}, {"y", s.y}, {"z", s.z}};
}

void write_error(const RunConfig& cfg, const std::string& command, const std::string& kind,
                 const std::string& message, const nlohmann::json& extra) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) return;
  nlohmann::json doc = {{"artifact", "error"},
                        {"header", header_for(cfg, cfg.grid).to_json()},
                        {"command", command},
                        {"kind", kind},
                        {"message", message}};
  for (const auto& item : extra.items()) doc[item.key()] = item.value();
  std::ofstream out(cfg.output_dir / "error.json", std::ios::binary | std::ios::trunc);
  if (out) out << doc.dump(2) << '\n';
}

double value_at(const ValueField& field, const PortfolioState& s) { return field.sample(s.t, s.z, s.x, s.y); }

struct SweepWriter {
  fmt::memory_buffer buf;
  void row(const std::string& axis, double value, const std::string& metric, double result) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", axis, format_real(value), metric, format_real(result));
  }
};

void sweep_epsilon(const RunConfig& cfg, SweepWriter& w, nlohmann::json& timing) {
  const auto eps = cfg.sweep.epsilon_list.empty() ? cfg.grid.epsilon_list : cfg.sweep.epsilon_list;
  auto t0 = Clock::now();
  const ValueField constrained = solve_field(cfg.problem, cfg.grid);
  timing["epsilon.constrained"] = seconds_since(t0);
  const GridGeometry& g = constrained.geometry();
  const double v_start = value_at(constrained, cfg.simulate.start);
  std::unique_ptr<ValueField> prev;
  double prev_eps = 0.0;
  for (double e : eps) {
    t0 = Clock::now();
    auto pen = std::make_unique<ValueField>(solve_penalized(cfg.problem, cfg.grid, e));
    timing[fmt::format("epsilon.{}", format_real(e))] = seconds_since(t0);
    long bound = 0, order = 0;
    double vmax = 0.0;
    for (int n = 0; n <= g.nt(); ++n) {
      for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
        for (int i = 0; i <= g.nx(); ++i) {
          for (int j = 0; j <= g.j_hi(z); ++j) {
            const double v = pen->at(n, z, i, j);
            vmax = std::max(vmax, v);
            if (constrained.at(n, z, i, j) - v > cfg.verify.penalty.tol) ++bound;
            if (prev) {
              const double up = e < prev_eps ? v - prev->at(n, z, i, j) : prev->at(n, z, i, j) - v;
              if (up > cfg.verify.penalty.tol) ++order;
            }
          }
        }
      }
    }
    w.row("epsilon", e, "h", verify::boundary_sup(*pen, cfg.sweep.x_bar));
    w.row("epsilon", e, "value_at_start", value_at(*pen, cfg.simulate.start));
    w.row("epsilon", e, "gap_to_constrained_at_start", value_at(*pen, cfg.simulate.start) - v_start);
    w.row("epsilon", e, "max_value", vmax);
    w.row("epsilon", e, "bound_violations", static_cast<double>(bound));
    w.row("epsilon", e, "order_violations", static_cast<double>(order));
    prev = std::move(pen);
    prev_eps = e;
  }
}

void sweep_grid(const RunConfig& cfg, SweepWriter& w, nlohmann::json& timing) {
  for (int nx : cfg.sweep.nx_list) {
    GridConfig g = cfg.grid;
    const double f = static_cast<double>(nx) / cfg.grid.nx;
    g.nx = nx;
    g.ny = std::max(1, static_cast<int>(std::lround(cfg.grid.ny * f)));
    g.nt = std::max(1, static_cast<int>(std::lround(cfg.grid.nt * f)));
    const auto t0 = Clock::now();
    const QviSolution sol = solve_qvi(cfg.problem, g);
    timing[fmt::format("grid.{}", nx)] = seconds_since(t0);
    const GridGeometry& geo = sol.field.geometry();
    w.row("grid", nx, "dx", geo.dx());
    w.row("grid", nx, "dy", geo.dy());
    w.row("grid", nx, "dt", geo.dt());
    w.row("grid", nx, "residual_linf", sol.residuals.linf);
    w.row("grid", nx, "residual_l1", sol.residuals.l1);
    w.row("grid", nx, "violations", sol.residuals.violations);
    w.row("grid", nx, "value_at_start", value_at(sol.field, cfg.simulate.start));
  }
}

void sweep_dt(const RunConfig& cfg, SweepWriter& w, nlohmann::json& timing) {
  const auto& k = cfg.problem.positions;
  const int z = k.contains(1) ? 1 : k.lowest();
  if (z == 0) throw ConfigError("sweep.axes", "the dt axis needs a position other than 0");
  verify::ExitConfig e;
  e.dt_list = cfg.sweep.dt_list;
  e.delta = cfg.sweep.exit_delta;
  e.paths = cfg.sweep.exit_paths;
  e.level = cfg.verify.exit.level;
  e.seed = child_seed(cfg.seed, "sweep.dt");
  e.threads = cfg.threads;
  const auto t0 = Clock::now();
  const auto r = verify::check_immediate_exit(cfg.problem, {0.0, 1.0, cfg.problem.cost(-z), z}, e);
  timing["dt"] = seconds_since(t0);
  for (const auto& est : r.details.at("estimates")) {
    const double dt = est.at("dt").get<double>();
    w.row("dt", dt, "crossing_probability", est.at("probability").get<double>());
    w.row("dt", dt, "se", est.at("se").get<double>());
  }
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  prepare_output(cfg);
  nlohmann::json timing = nlohmann::json::object();
  auto t0 = Clock::now();
  const QviSolution sol = solve_qvi(cfg.problem, cfg.grid);
  timing["solve"] = seconds_since(t0);
  t0 = Clock::now();
  const StrategyMap strategy = extract_strategy(cfg.problem, cfg.grid, sol.field);
  timing["strategy"] = seconds_since(t0);

  const ArtifactHeader header = header_for(cfg, cfg.grid);
  t0 = Clock::now();
  {
    auto out = open_artifact(cfg, "value.csv");
    write_value_csv(out, sol.field, header, cfg.export_stride);
  }
  {
    auto out = open_artifact(cfg, "strategy.csv");
    write_strategy_csv(out, strategy, header, cfg.export_stride);
  }
  write_json(cfg, "residuals.json", residual_json(sol.residuals, cfg.grid, header));
  timing["export"] = seconds_since(t0);
  write_json(cfg, "timing.json", timing);
  fmt::print(log, "solve: {}x{}x{} grid, residual linf {:.3e}, l1 {:.3e}, {} violations, {:.2f} s\n", cfg.grid.nx,
             cfg.grid.ny, cfg.grid.nt, sol.residuals.linf, sol.residuals.l1, sol.residuals.violations,
             timing["solve"].get<double>());
  fmt::print(log, "wrote {}\n", cfg.output_dir.string());
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  prepare_output(cfg);
  nlohmann::json timing = nlohmann::json::object();
  const SimulateOptions& s = cfg.simulate;
  std::unique_ptr<ValueField> field;
  std::unique_ptr<StrategyMap> strategy;
  std::unique_ptr<StrategyPolicy> policy;
  nlohmann::json policy_doc;
  auto t0 = Clock::now();
  switch (s.policy) {
    case PolicyKind::kExtracted:
      field = std::make_unique<ValueField>(solve_field(cfg.problem, cfg.grid));
      strategy = std::make_unique<StrategyMap>(extract_strategy(cfg.problem, cfg.grid, *field));
      policy = std::make_unique<FieldStrategyPolicy>(cfg.problem, *field, *strategy);
      policy_doc = {{"kind", "extracted"}, {"grid", to_json(cfg.grid)}};
      timing["solve"] = seconds_since(t0);
      break;
    case PolicyKind::kConstant:
      policy = std::make_unique<ConstantPolicy>(cfg.problem, s.constant_z);
      policy_doc = {{"kind", "constant"}, {"z", s.constant_z}};
      break;
    case PolicyKind::kCsv: {
      const fs::path file = s.strategy_csv.empty() ? cfg.output_dir / "strategy.csv" : s.strategy_csv;
      std::ifstream in(file);
      if (!in) throw Error("missing strategy artifact '" + file.string() + "'");
      auto tab = std::make_unique<TabulatedPolicy>(cfg.problem, in);
      policy_doc = {{"kind", "csv"}, {"rows", tab->rows()}};
      policy = std::move(tab);
      timing["load"] = seconds_since(t0);
      break;
    }
  }

  std::vector<PathSample> dump;
  t0 = Clock::now();
  const EvalReport report = evaluate_strategy(cfg.problem, *policy, s.start, cfg.paths,
                                              s.dump_paths > 0 ? &dump : nullptr, s.dump_paths);
  timing["simulate"] = seconds_since(t0);

  const ArtifactHeader header = header_for(cfg, cfg.grid);
  nlohmann::json doc = {{"artifact", "eval"},
                        {"header", header.to_json()},
                        {"policy", policy_doc},
                        {"start", state_json(s.start)},
                        {"report", report.to_json()}};
  if (field) doc["grid_value"] = value_at(*field, s.start);
  write_json(cfg, "eval.json", doc);
  if (s.dump_paths > 0) {
    auto out = open_artifact(cfg, "paths.csv");
    out << header.csv_comment();
    write_path_dump_csv(out, dump);
  }
  write_json(cfg, "timing.json", timing);
  fmt::print(log, "simulate: {} paths, mean {:.6f}, se {:.2e}, ci [{:.6f}, {:.6f}], {} margin calls\n",
             report.n_paths, report.mean, report.se, report.ci_low, report.ci_high, report.margin_calls);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  prepare_output(cfg);
  const auto results = verify::full_report(cfg.problem, cfg.verify);
  nlohmann::json doc = verify::report_json(results);
  doc["artifact"] = "checks";
  doc["header"] = header_for(cfg, cfg.verify.grid).to_json();
  write_json(cfg, "checks.json", doc);
  write_json(cfg, "timing.json", verify::timing_json(results));
  verify::print_summary(log, results);
  return verify::all_passed(results) ? kExitOk : kExitFailure;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  if (cfg.sweep.axes.empty()) throw ConfigError("sweep.axes", "axis list must not be empty");
  prepare_output(cfg);
  SweepWriter w;
  nlohmann::json timing = nlohmann::json::object();
  for (const auto& axis : cfg.sweep.axes) {
    if (axis == "epsilon") {
      sweep_epsilon(cfg, w, timing);
    } else if (axis == "grid") {
      sweep_grid(cfg, w, timing);
    } else if (axis == "dt") {
      sweep_dt(cfg, w, timing);
    } else {
      throw ConfigError("sweep.axes", "unknown axis '" + axis + "'");
    }
    fmt::print(log, "sweep: axis {} done\n", axis);
  }
  {
    auto out = open_artifact(cfg, "sweep.csv");
    out << header_for(cfg, cfg.grid).csv_comment() << "axis,axis_value,metric,value\n";
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  }
  write_json(cfg, "timing.json", timing);
  return kExitOk;
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  try {
    if (command == "solve") return cmd_solve(cfg, log);
    if (command == "simulate") return cmd_simulate(cfg, log);
    if (command == "verify") return cmd_verify(cfg, log);
    if (command == "sweep") return cmd_sweep(cfg, log);
    fmt::print(log, "error: unknown command '{}'\n", command);
    return kExitConfig;
  } catch (const ConfigError& e) {
    write_error(cfg, command, "config", e.what(), {{"key", e.key()}});
    fmt::print(log, "error: {}\n", e.what());
    return kExitConfig;
  } catch (const NonConvergenceError& e) {
    const NodeWitness& w = e.worst();
    write_error(cfg, command, "non_convergence", e.what(),
                {{"witness",
                  {{"time_index", w.time_index}, {"z", w.z}, {"i", w.i}, {"j", w.j}, {"x", w.x}, {"y", w.y},
                   {"change", w.change}}}});
    fmt::print(log, "error: {}\n", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    write_error(cfg, command, "failure", e.what(), nlohmann::json::object());
    fmt::print(log, "error: {}\n", e.what());
    return kExitFailure;
  }
}

}  // namespace switchgrid::cli
