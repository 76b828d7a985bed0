#include "switchgrid/pathsim/evaluate.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "switchgrid/grid/export.hpp"
#include "switchgrid/util/numeric.hpp"
#include "switchgrid/util/parallel.hpp"

namespace switchgrid {

nlohmann::json EvalReport::to_json() const {
  return {{"mean", mean},
          {"se", se},
          {"ci", {ci_low, ci_high}},
          {"stop_causes", {{"horizon", horizon_stops}, {"margin_call", margin_calls}}},
          {"n_paths", n_paths},
          {"seed", seed},
          {"coverage_misses", coverage_misses},
          {"switches", switches},
          {"dt", dt},
          {"antithetic", antithetic},
          {"uncleared_margin_payoff", {{"mean", mean_uncleared}, {"se", se_uncleared}}}};
}

PathOutcome simulate_outcome(const ProblemSpec& spec, const StrategyPolicy& policy, const PortfolioState& start,
                             const PathConfig& cfg, std::size_t path, std::vector<PathSample>* trace) {
  const int steps = step_count(start.t, spec.horizon, cfg.dt);
  const double h = steps > 0 ? (spec.horizon - start.t) / steps : 0.0;
  PathRng rng(cfg.seed, path, cfg.antithetic);
  PathOutcome out;
  PortfolioState s = start;
  auto margin_stop = [&]() {
    out.cause = StopCause::kMarginCall;
    out.stop_time = s.t;
    out.wealth_at_stop = s.y;
    out.position_at_stop = s.z;
    out.terminal_wealth = s.y;
    out.payoff = spec.utility(s.y - spec.cost(-s.z));
    out.payoff_uncleared = spec.utility(s.y);
  };
  for (int k = 0; k <= steps; ++k) {
    s.t = k == steps ? spec.horizon : start.t + k * h;
    if (trace) trace->push_back({path, k, s.t, s.x, s.y, s.z});
    if (detect_margin_call(spec, s)) {
      margin_stop();
      return out;
    }
    if (k == steps) break;
    const PolicyDecision d = policy.decide(s);
    if (!d.covered) out.coverage_miss = true;
    if (d.target && *d.target != s.z && in_gamma(spec, s.y, s.z, *d.target)) {
      auto [next, event] = apply_switch(spec, s, *d.target);
      s = next;
      out.total_cost += event.cost_paid;
      out.events.push_back(event);
      if (detect_margin_call(spec, s)) {
        margin_stop();
        return out;
      }
    }
    const double xi = rng.normal();
    const double x1 = euler_step(spec, s.t, s.x, h, xi);
    s.y = wealth_step(s, x1 - s.x);
    s.x = x1;
  }
  out.cause = StopCause::kHorizon;
  out.stop_time = spec.horizon;
  out.wealth_at_stop = s.y;
  out.position_at_stop = s.z;
  if (s.z != 0) {
    auto [next, event] = apply_switch(spec, s, 0);
    s = next;
    out.total_cost += event.cost_paid;
    out.events.push_back(event);
  }
  out.terminal_wealth = s.y;
  out.payoff = spec.utility(s.y);
  out.payoff_uncleared = out.payoff;
  return out;
}

EvalReport evaluate_strategy(const ProblemSpec& spec, const StrategyPolicy& policy, const PortfolioState& start,
                             const PathConfig& cfg, std::vector<PathSample>* dump, std::size_t dump_paths) {
  if (cfg.n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
  if (cfg.antithetic && cfg.n_paths % 2 != 0) {
    throw std::invalid_argument("antithetic sampling needs an even path count");
  }
  const std::size_t n = cfg.n_paths;
  std::vector<double> payoff(n);
  std::vector<double> uncleared(n);
  std::vector<std::uint8_t> margin(n);
  std::vector<std::uint8_t> miss(n);
  std::vector<std::uint32_t> switches(n);
  const std::size_t traced = dump ? std::min(dump_paths, n) : 0;
  std::vector<std::vector<PathSample>> traces(traced);
  parallel_for(n, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const PathOutcome o = simulate_outcome(spec, policy, start, cfg, p, p < traced ? &traces[p] : nullptr);
      payoff[p] = o.payoff;
      uncleared[p] = o.payoff_uncleared;
      margin[p] = o.cause == StopCause::kMarginCall;
      miss[p] = o.coverage_miss;
      switches[p] = static_cast<std::uint32_t>(o.events.size());
    }
  });

  EvalReport r;
  r.n_paths = n;
  r.seed = cfg.seed;
  r.dt = cfg.dt;
  r.antithetic = cfg.antithetic;
  for (std::size_t p = 0; p < n; ++p) {
    r.margin_calls += margin[p];
    r.coverage_misses += miss[p];
    r.switches += switches[p];
  }
  r.horizon_stops = n - r.margin_calls;
  auto stats = [&](const std::vector<double>& v) {
    if (!cfg.antithetic) return mean_and_se(v);
    std::vector<double> pairs(n / 2);
    for (std::size_t k = 0; k < pairs.size(); ++k) pairs[k] = 0.5 * (v[2 * k] + v[2 * k + 1]);
    return mean_and_se(pairs);
  };
  const MeanSe a = stats(payoff);
  const MeanSe b = stats(uncleared);
  r.mean = a.mean;
  r.se = a.se;
  r.ci_low = a.mean - 1.96 * a.se;
  r.ci_high = a.mean + 1.96 * a.se;
  r.mean_uncleared = b.mean;
  r.se_uncleared = b.se;
  if (dump) {
    for (auto& t : traces) dump->insert(dump->end(), t.begin(), t.end());
  }
  return r;
}

void write_path_dump_csv(std::ostream& out, const std::vector<PathSample>& samples) {
  out << "path_id,step,t,x,y,z\n";
  for (const auto& s : samples) {
    out << fmt::format("{},{},{},{},{},{}\n", s.path, s.step, format_real(s.t), format_real(s.x),
                       format_real(s.y), s.z);
  }
}

}  // namespace switchgrid
