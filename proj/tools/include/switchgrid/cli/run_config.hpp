#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchgrid/grid/grid.hpp"
#include "switchgrid/model/problem.hpp"
#include "switchgrid/pathsim/paths.hpp"
#include "switchgrid/verify/report.hpp"

namespace switchgrid::cli {

enum class PolicyKind { kExtracted, kConstant, kCsv };

struct SimulateOptions {
  PolicyKind policy = PolicyKind::kExtracted;
  int constant_z = 0;
  /// Strategy CSV for the csv policy; empty means <output>/strategy.csv.
  std::filesystem::path strategy_csv;
  PortfolioState start{0.0, 1.0, 1.0, 0};
  std::size_t dump_paths = 0;
};

struct SweepOptions {
  std::vector<std::string> axes{"epsilon"};
  std::vector<double> epsilon_list;  ///< empty: grid.epsilon_list
  std::vector<int> nx_list{50, 100, 200};
  std::vector<double> dt_list{1e-3, 1e-4, 1e-5};
  double x_bar = 4.0;
  std::size_t exit_paths = 20000;
  double exit_delta = 0.01;
};

struct RunConfig {
  std::filesystem::path source;  ///< config file, empty when parsed from memory
  ProblemSpec problem = ref1_problem();
  nlohmann::json problem_doc;
  GridConfig grid;
  PathConfig paths;
  SimulateOptions simulate;
  verify::VerifyConfig verify;
  SweepOptions sweep;
  std::filesystem::path output_dir = "out";
  int export_stride = 1;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> only;
  std::vector<std::string> axes;
};

/// Parses a run document. Relative paths resolve against `base_dir`.
/// Throws ConfigError naming the offending key.
RunConfig parse_config_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file.
RunConfig parse_config(const std::filesystem::path& file);

/// Applies overrides, then SWITCHGRID_THREADS when no thread count was
/// given on the command line, and propagates seed and threads into every
/// sub-config.
void apply_overrides(RunConfig& cfg, const Overrides& overrides);

}  // namespace switchgrid::cli
