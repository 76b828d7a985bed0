#include <benchmark/benchmark.h>

#include "switchgrid/grid/operators.hpp"
#include "switchgrid/grid/solver.hpp"

using namespace switchgrid;

namespace {

GridConfig square(int n, int nt, int threads = 1) {
  GridConfig g;
  g.nx = n;
  g.ny = n;
  g.nt = nt;
  g.threads = threads;
  return g;
}

void BM_StepBackward(benchmark::State& state) {
  const auto spec = ref1_problem();
  const auto g = square(static_cast<int>(state.range(0)), 50, static_cast<int>(state.range(1)));
  const auto term = terminal_condition(spec, g);
  for (auto _ : state) {
    auto prev = step_backward(spec, g, term, g.nt - 1);
    benchmark::DoNotOptimize(prev.at(0, 1, 1));
  }
  const auto& geo = term.geometry();
  std::size_t nodes = 0;
  for (int z = geo.positions().lowest(); z <= geo.positions().highest(); ++z) nodes += geo.nodes(z);
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * nodes));
}
BENCHMARK(BM_StepBackward)->Args({100, 1})->Args({200, 1})->Args({200, 4})->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_SolveQvi(benchmark::State& state) {
  const auto spec = ref1_problem();
  const auto g = square(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) / 4);
  for (auto _ : state) {
    auto sol = solve_qvi(spec, g);
    benchmark::DoNotOptimize(sol.residuals.linf);
  }
}
BENCHMARK(BM_SolveQvi)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SolvePenalized(benchmark::State& state) {
  const auto spec = ref1_problem();
  const auto g = square(100, 25);
  for (auto _ : state) {
    auto f = solve_penalized(spec, g, 1e-3);
    benchmark::DoNotOptimize(f.at(0, 0, 1, 1));
  }
}
BENCHMARK(BM_SolvePenalized)->Unit(benchmark::kMillisecond);

void BM_ApplyIntervention(benchmark::State& state) {
  const auto spec = ref1_problem();
  const auto g = square(100, 10);
  const auto term = terminal_condition(spec, g);
  const auto& geo = term.geometry();
  const auto order = state.range(0) ? Interpolation::kMonotoneCubic : Interpolation::kLinear;
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i <= geo.nx(); i += 5) {
      for (int j = 0; j <= geo.j_hi(2); j += 5) {
        const auto r = apply_intervention(spec, term, 2, i, j, order);
        if (r) acc += r->value;
      }
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_ApplyIntervention)->Arg(0)->Arg(1);

}  // namespace
