#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "switchgrid/cli/commands.hpp"
#include "switchgrid/cli/run_config.hpp"
#include "switchgrid/util/errors.hpp"

int main(int argc, char** argv) {
  using namespace switchgrid;

  CLI::App app{"switchgrid: optimal switching under transaction costs on a grid"};
  app.set_version_flag("--version", SWITCHGRID_VERSION);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  cli::Overrides overrides;

  app.add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker threads (default: SWITCHGRID_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--only", overrides.only, "Run only the named checks (verify)");
  app.add_option("--axis", overrides.axes, "Sweep axis: epsilon, grid or dt (sweep)");

  app.add_subcommand("solve", "Solve the QVI and export value, strategy and residual artifacts");
  app.add_subcommand("simulate", "Monte Carlo evaluation of a strategy");
  app.add_subcommand("verify", "Run the verification checks");
  app.add_subcommand("sweep", "Epsilon, grid or dt sweeps as a long-format table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  if (*out_opt) overrides.output_dir = out_dir;
  if (*seed_opt) overrides.seed = seed;
  if (*threads_opt) overrides.threads = threads;

  cli::RunConfig cfg;
  try {
    cfg = cli::parse_config(config_path);
    cli::apply_overrides(cfg, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  }
  return cli::run_command(app.get_subcommands().front()->get_name(), cfg, std::cerr);
}
