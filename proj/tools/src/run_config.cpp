#include "switchgrid/cli/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "switchgrid/model/json_util.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/hash.hpp"
#include "switchgrid/util/parallel.hpp"

namespace switchgrid::cli {

namespace {

using namespace json_util;
namespace fs = std::filesystem;

const char* const kProblemKeys[] = {"market", "cost", "utility", "positions", "horizon"};

void allow_keys(const nlohmann::json& obj, const std::string& prefix, std::initializer_list<const char*> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) throw ConfigError(join(prefix, item.key()), "unknown key");
  }
}

nlohmann::json read_json(const fs::path& file, const std::string& key) {
  std::ifstream in(file);
  if (!in) throw ConfigError(key, "cannot open '" + file.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(key, "'" + file.string() + "' is not valid JSON: " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::size_t count(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                  std::size_t fallback) {
  const long long v = get_integer(obj, key, prefix, static_cast<long long>(fallback));
  if (v < 1) throw ConfigError(join(prefix, key), "must be a positive integer");
  return static_cast<std::size_t>(v);
}

double positive(const nlohmann::json& obj, const std::string& key, const std::string& prefix, double fallback) {
  const double v = get_number(obj, key, prefix, fallback);
  if (!(v > 0.0)) throw ConfigError(join(prefix, key), "must be positive");
  return v;
}

std::vector<double> positive_list(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                                  std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  auto v = get_number_array(obj, key, prefix);
  if (v.empty()) throw ConfigError(join(prefix, key), "must not be empty");
  for (double d : v) {
    if (!(d > 0.0)) throw ConfigError(join(prefix, key), "entries must be positive");
  }
  return v;
}

/// Grid keys read over `defaults` rather than the library defaults.
GridConfig grid_over(const nlohmann::json& obj, const std::string& key, const std::string& prefix,
                     const GridConfig& defaults) {
  if (!obj.contains(key)) return defaults;
  const std::string p = join(prefix, key);
  require_object(obj.at(key), p);
  nlohmann::json merged = to_json(defaults);
  merged.update(obj.at(key));
  GridConfig g = grid_from_json(merged, p);
  g.threads = defaults.threads;
  return g;
}

PortfolioState parse_state(const nlohmann::json& obj, const std::string& p, PortfolioState s) {
  require_object(obj, p);
  allow_keys(obj, p, {"t", "x", "y", "z"});
  s.t = get_number(obj, "t", p, s.t);
  s.x = get_number(obj, "x", p, s.x);
  s.y = get_number(obj, "y", p, s.y);
  s.z = static_cast<int>(get_integer(obj, "z", p, s.z));
  if (s.t < 0.0) throw ConfigError(join(p, "t"), "must be nonnegative");
  if (s.x < 0.0) throw ConfigError(join(p, "x"), "must be nonnegative");
  return s;
}

ProblemSpec parse_problem(const nlohmann::json& doc, const fs::path& base, nlohmann::json& problem_doc) {
  if (doc.contains("problem")) {
    for (const char* k : kProblemKeys) {
      if (doc.contains(k)) throw ConfigError(k, "problem keys must not appear next to 'problem'");
    }
    const auto& p = doc.at("problem");
    if (p.is_string()) {
      const fs::path file = resolve(base, p.get<std::string>());
      if (!fs::exists(file)) throw ConfigError("problem", "file '" + file.string() + "' does not exist");
      problem_doc = read_json(file, "problem");
      return problem_from_json(problem_doc);
    }
    if (!p.is_object()) throw ConfigError("problem", "expected a file path or an object");
    problem_doc = p;
    return problem_from_json(problem_doc, "problem");
  }
  problem_doc = nlohmann::json::object();
  for (const char* k : kProblemKeys) {
    if (doc.contains(k)) problem_doc[k] = doc.at(k);
  }
  return problem_from_json(problem_doc);
}

void parse_paths(const nlohmann::json& obj, PathConfig& paths) {
  const std::string p = "paths";
  require_object(obj, p);
  allow_keys(obj, p, {"n_paths", "dt", "antithetic"});
  paths.n_paths = count(obj, "n_paths", p, paths.n_paths);
  paths.dt = positive(obj, "dt", p, paths.dt);
  paths.antithetic = get_bool(obj, "antithetic", p, paths.antithetic);
  if (paths.antithetic && paths.n_paths % 2 != 0) {
    throw ConfigError("paths.n_paths", "must be even with antithetic pairs");
  }
}

void parse_simulate(const nlohmann::json& obj, const fs::path& base, SimulateOptions& s) {
  const std::string p = "simulate";
  require_object(obj, p);
  allow_keys(obj, p, {"policy", "z", "strategy", "start", "dump_paths"});
  const std::string policy = get_string(obj, "policy", p, "extracted");
  if (policy == "extracted") {
    s.policy = PolicyKind::kExtracted;
  } else if (policy == "constant") {
    s.policy = PolicyKind::kConstant;
  } else if (policy == "csv") {
    s.policy = PolicyKind::kCsv;
  } else {
    throw ConfigError("simulate.policy", "expected 'extracted', 'constant' or 'csv'");
  }
  s.constant_z = static_cast<int>(get_integer(obj, "z", p, s.constant_z));
  if (obj.contains("strategy")) s.strategy_csv = resolve(base, get_string(obj, "strategy", p));
  if (obj.contains("start")) s.start = parse_state(obj.at("start"), "simulate.start", s.start);
  const long long dump = get_integer(obj, "dump_paths", p, 0);
  if (dump < 0) throw ConfigError("simulate.dump_paths", "must be nonnegative");
  s.dump_paths = static_cast<std::size_t>(dump);
}

void parse_verify(const nlohmann::json& obj, verify::VerifyConfig& v) {
  const std::string p = "verify";
  require_object(obj, p);
  allow_keys(obj, p,
             {"grid", "s_grid", "refine_grid", "validation_samples", "s_trials", "dpp", "penalty", "exit",
              "moments", "cross", "residual_threshold", "only"});
  v.grid = grid_over(obj, "grid", p, v.grid);
  v.s_grid = grid_over(obj, "s_grid", p, v.s_grid);
  v.refine_grid = grid_over(obj, "refine_grid", p, v.refine_grid);
  v.validation_samples = count(obj, "validation_samples", p, v.validation_samples);
  v.s_trials = static_cast<int>(count(obj, "s_trials", p, static_cast<std::size_t>(v.s_trials)));
  v.residual_threshold = positive(obj, "residual_threshold", p, v.residual_threshold);
  if (obj.contains("dpp")) {
    const auto& d = obj.at("dpp");
    const std::string dp = "verify.dpp";
    require_object(d, dp);
    allow_keys(d, dp, {"nodes", "paths", "substeps", "disc_tol"});
    v.dpp.nodes = static_cast<int>(count(d, "nodes", dp, static_cast<std::size_t>(v.dpp.nodes)));
    v.dpp.paths = count(d, "paths", dp, v.dpp.paths);
    v.dpp.substeps = static_cast<int>(count(d, "substeps", dp, static_cast<std::size_t>(v.dpp.substeps)));
    v.dpp.disc_tol = positive(d, "disc_tol", dp, v.dpp.disc_tol);
  }
  if (obj.contains("penalty")) {
    const auto& d = obj.at("penalty");
    const std::string dp = "verify.penalty";
    require_object(d, dp);
    allow_keys(d, dp, {"x_bar", "tol", "threshold_fraction"});
    v.penalty.x_bar = positive(d, "x_bar", dp, v.penalty.x_bar);
    v.penalty.tol = positive(d, "tol", dp, v.penalty.tol);
    v.penalty.threshold_fraction = positive(d, "threshold_fraction", dp, v.penalty.threshold_fraction);
  }
  if (obj.contains("exit")) {
    const auto& d = obj.at("exit");
    const std::string dp = "verify.exit";
    require_object(d, dp);
    allow_keys(d, dp, {"dt_list", "delta", "paths", "level"});
    v.exit.dt_list = positive_list(d, "dt_list", dp, v.exit.dt_list);
    v.exit.delta = positive(d, "delta", dp, v.exit.delta);
    v.exit.paths = count(d, "paths", dp, v.exit.paths);
    v.exit.level = get_number(d, "level", dp, v.exit.level);
  }
  if (obj.contains("moments")) {
    const auto& d = obj.at("moments");
    const std::string dp = "verify.moments";
    require_object(d, dp);
    allow_keys(d, dp,
               {"x_sweep", "y", "z", "m", "paths", "dt", "band", "coupled_x", "coupled_d0", "coupled_tol"});
    v.moments.x_sweep = positive_list(d, "x_sweep", dp, v.moments.x_sweep);
    v.moments.y = get_number(d, "y", dp, v.moments.y);
    v.moments.z = static_cast<int>(get_integer(d, "z", dp, v.moments.z));
    v.moments.m = static_cast<int>(count(d, "m", dp, static_cast<std::size_t>(v.moments.m)));
    v.moments.paths = count(d, "paths", dp, v.moments.paths);
    v.moments.dt = positive(d, "dt", dp, v.moments.dt);
    v.moments.band = positive(d, "band", dp, v.moments.band);
    v.moments.coupled_x = positive(d, "coupled_x", dp, v.moments.coupled_x);
    v.moments.coupled_d0 = positive(d, "coupled_d0", dp, v.moments.coupled_d0);
    v.moments.coupled_tol = positive(d, "coupled_tol", dp, v.moments.coupled_tol);
  }
  if (obj.contains("cross")) {
    const auto& d = obj.at("cross");
    const std::string dp = "verify.cross";
    require_object(d, dp);
    allow_keys(d, dp, {"start", "paths", "dt", "rel_tol"});
    if (d.contains("start")) v.cross.start = parse_state(d.at("start"), "verify.cross.start", v.cross.start);
    v.cross.paths = count(d, "paths", dp, v.cross.paths);
    v.cross.dt = positive(d, "dt", dp, v.cross.dt);
    v.cross.rel_tol = positive(d, "rel_tol", dp, v.cross.rel_tol);
  }
  if (obj.contains("only")) {
    const auto& o = obj.at("only");
    if (!o.is_array()) throw ConfigError("verify.only", "expected an array of check names");
    v.only.clear();
    for (std::size_t k = 0; k < o.size(); ++k) {
      if (!o[k].is_string()) throw ConfigError("verify.only[" + std::to_string(k) + "]", "expected a string");
      v.only.push_back(o[k].get<std::string>());
    }
  }
}

void check_axes(const std::vector<std::string>& axes, const std::string& key) {
  if (axes.empty()) throw ConfigError(key, "axis list must not be empty");
  for (const auto& a : axes) {
    if (a != "epsilon" && a != "grid" && a != "dt") {
      throw ConfigError(key, "unknown axis '" + a + "', expected epsilon, grid or dt");
    }
  }
}

void check_only(const std::vector<std::string>& only, const std::string& key) {
  const auto names = verify::check_names();
  for (const auto& n : only) {
    if (std::find(names.begin(), names.end(), n) == names.end()) {
      throw ConfigError(key, "unknown check '" + n + "'");
    }
  }
}

void parse_sweep(const nlohmann::json& obj, SweepOptions& s) {
  const std::string p = "sweep";
  require_object(obj, p);
  allow_keys(obj, p, {"axes", "epsilon_list", "nx_list", "dt_list", "x_bar", "exit_paths", "exit_delta"});
  if (obj.contains("axes")) {
    const auto& a = obj.at("axes");
    if (!a.is_array()) throw ConfigError("sweep.axes", "expected an array of axis names");
    s.axes.clear();
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!a[k].is_string()) throw ConfigError("sweep.axes[" + std::to_string(k) + "]", "expected a string");
      s.axes.push_back(a[k].get<std::string>());
    }
    check_axes(s.axes, "sweep.axes");
  }
  if (obj.contains("epsilon_list")) {
    s.epsilon_list = positive_list(obj, "epsilon_list", p, {});
  }
  if (obj.contains("nx_list")) {
    const auto v = positive_list(obj, "nx_list", p, {});
    s.nx_list.clear();
    for (double d : v) {
      if (d != static_cast<double>(static_cast<int>(d))) throw ConfigError("sweep.nx_list", "entries must be integers");
      s.nx_list.push_back(static_cast<int>(d));
    }
  }
  s.dt_list = positive_list(obj, "dt_list", p, s.dt_list);
  s.x_bar = positive(obj, "x_bar", p, s.x_bar);
  s.exit_paths = count(obj, "exit_paths", p, s.exit_paths);
  s.exit_delta = positive(obj, "exit_delta", p, s.exit_delta);
}

}  // namespace

RunConfig parse_config_json(const nlohmann::json& doc, const fs::path& base_dir) {
  require_object(doc, "");
  allow_keys(doc, "",
             {"problem", "market", "cost", "utility", "positions", "horizon", "grid", "paths", "simulate",
              "verify", "sweep", "output", "seed", "threads"});
  RunConfig cfg;
  cfg.problem = parse_problem(doc, base_dir, cfg.problem_doc);
  if (doc.contains("grid")) cfg.grid = grid_from_json(doc.at("grid"), "grid");
  if (doc.contains("paths")) parse_paths(doc.at("paths"), cfg.paths);
  if (doc.contains("simulate")) parse_simulate(doc.at("simulate"), base_dir, cfg.simulate);
  if (doc.contains("verify")) parse_verify(doc.at("verify"), cfg.verify);
  if (doc.contains("sweep")) parse_sweep(doc.at("sweep"), cfg.sweep);
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    require_object(o, "output");
    allow_keys(o, "output", {"dir", "export_stride"});
    if (o.contains("dir")) cfg.output_dir = resolve(base_dir, get_string(o, "dir", "output"));
    cfg.export_stride = static_cast<int>(count(o, "export_stride", "output", 1));
  } else if (!base_dir.empty()) {
    cfg.output_dir = base_dir / cfg.output_dir;
  }
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.threads = static_cast<int>(count(doc, "threads", "", 1));
  check_only(cfg.verify.only, "verify.only");

  if (!cfg.problem.positions.contains(cfg.simulate.start.z)) {
    throw ConfigError("simulate.start.z", "position outside K");
  }
  if (cfg.simulate.policy == PolicyKind::kConstant && !cfg.problem.positions.contains(cfg.simulate.constant_z)) {
    throw ConfigError("simulate.z", "position outside K");
  }
  apply_overrides(cfg, {});
  return cfg;
}

RunConfig parse_config(const fs::path& file) {
  if (!fs::exists(file)) throw ConfigError("config", "file '" + file.string() + "' does not exist");
  RunConfig cfg = parse_config_json(read_json(file, "config"), file.parent_path());
  cfg.source = file;
  return cfg;
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) {
    if (*o.threads < 1) throw ConfigError("threads", "must be a positive integer");
    cfg.threads = *o.threads;
  } else {
    cfg.threads = threads_from_env(cfg.threads);
  }
  if (!o.only.empty()) {
    check_only(o.only, "only");
    cfg.verify.only = o.only;
  }
  if (!o.axes.empty()) {
    check_axes(o.axes, "axis");
    cfg.sweep.axes = o.axes;
  }

  cfg.grid.threads = cfg.threads;
  cfg.paths.threads = cfg.threads;
  cfg.paths.seed = child_seed(cfg.seed, "simulate");
  cfg.verify.seed = cfg.seed;
  cfg.verify.threads = cfg.threads;
  cfg.verify.grid.threads = cfg.threads;
  cfg.verify.s_grid.threads = cfg.threads;
  cfg.verify.refine_grid.threads = cfg.threads;
}

}  // namespace switchgrid::cli
