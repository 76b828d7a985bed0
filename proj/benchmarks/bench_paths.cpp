#include <benchmark/benchmark.h>

#include "switchgrid/grid/solver.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/pathsim/evaluate.hpp"
#include "switchgrid/pathsim/moments.hpp"
#include "switchgrid/pathsim/paths.hpp"
#include "switchgrid/pathsim/policy.hpp"

using namespace switchgrid;

namespace {

void BM_SimulatePaths(benchmark::State& state) {
  const auto spec = ref1_problem();
  PathConfig cfg;
  cfg.n_paths = static_cast<std::size_t>(state.range(0));
  cfg.dt = 1e-3;
  for (auto _ : state) {
    auto b = simulate_paths(spec, {0.0, 1.0, 1.0, 0}, cfg);
    benchmark::DoNotOptimize(b.x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_SimulatePaths)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EvaluateConstant(benchmark::State& state) {
  const auto spec = ref1_problem();
  const ConstantPolicy one(spec, 1);
  PathConfig cfg;
  cfg.n_paths = 2000;
  cfg.dt = 1e-3;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto r = evaluate_strategy(spec, one, {0.0, 4.0, 2.0, 0}, cfg);
    benchmark::DoNotOptimize(r.mean);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.n_paths));
}
BENCHMARK(BM_EvaluateConstant)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_EvaluateExtracted(benchmark::State& state) {
  const auto spec = ref1_problem();
  GridConfig g;
  g.nx = 100;
  g.ny = 100;
  g.nt = 25;
  const auto field = solve_field(spec, g);
  const auto strat = extract_strategy(spec, g, field);
  const FieldStrategyPolicy policy(spec, field, strat);
  PathConfig cfg;
  cfg.n_paths = 2000;
  cfg.dt = 1e-3;
  for (auto _ : state) {
    auto r = evaluate_strategy(spec, policy, {0.0, 4.0, 2.0, 1}, cfg);
    benchmark::DoNotOptimize(r.mean);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.n_paths));
}
BENCHMARK(BM_EvaluateExtracted)->Unit(benchmark::kMillisecond);

void BM_MomentStatistics(benchmark::State& state) {
  const auto spec = ref1_problem();
  const HoldPolicy hold;
  PathConfig cfg;
  cfg.n_paths = 2000;
  cfg.dt = 1e-3;
  for (auto _ : state) {
    auto m = moment_statistics(spec, {0.0, 4.0, 1.0, 1}, cfg, 2, hold);
    benchmark::DoNotOptimize(m.estimate);
  }
}
BENCHMARK(BM_MomentStatistics)->Unit(benchmark::kMillisecond);

}  // namespace
