#include "switchgrid/pathsim/moments.hpp"

#include <cmath>
#include <stdexcept>

#include "switchgrid/util/numeric.hpp"
#include "switchgrid/util/parallel.hpp"

namespace switchgrid {

namespace {

// One unstopped step: optional switch, then the price move.
struct Walker {
  const ProblemSpec& spec;
  const StrategyPolicy& policy;
  PortfolioState s;
  double cost = 0.0;
  double y0;

  void trade() {
    const PolicyDecision d = policy.decide(s);
    if (d.target && *d.target != s.z && in_gamma(spec, s.y, s.z, *d.target)) {
      auto [next, event] = apply_switch(spec, s, *d.target);
      s = next;
      cost += event.cost_paid;
    }
  }
  void move(double h, double xi) {
    const double x1 = euler_step(spec, s.t, s.x, h, xi);
    s.y = wealth_step(s, x1 - s.x);
    s.x = x1;
    s.t += h;
  }
  double compensated() const { return s.y - y0 + cost; }
};

void check_m(int m) {
  if (m < 1) throw std::invalid_argument("moment exponent must be positive");
}

}  // namespace

MomentEstimate moment_statistics(const ProblemSpec& spec, const PortfolioState& start, const PathConfig& cfg,
                                 int m, const StrategyPolicy& policy) {
  check_m(m);
  const int steps = step_count(start.t, spec.horizon, cfg.dt);
  const double h = steps > 0 ? (spec.horizon - start.t) / steps : 0.0;
  std::vector<double> sup(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, p, cfg.antithetic);
      Walker w{spec, policy, start, 0.0, start.y};
      double best = 0.0;
      for (int k = 0; k < steps; ++k) {
        w.trade();
        w.move(h, rng.normal());
        best = std::max(best, std::abs(w.compensated()));
      }
      sup[p] = std::pow(best, m);
    }
  });
  const MeanSe ms = mean_and_se(sup);
  return {ms.mean, ms.se, cfg.n_paths, m};
}

CoupledEstimate coupled_paths(const ProblemSpec& spec, const PortfolioState& start1, const PortfolioState& start2,
                              const PathConfig& cfg, int m, const StrategyPolicy& policy) {
  check_m(m);
  if (start1.z != start2.z || start1.t != start2.t) {
    throw std::invalid_argument("coupled starts must share t and z");
  }
  const int steps = step_count(start1.t, spec.horizon, cfg.dt);
  const double h = steps > 0 ? (spec.horizon - start1.t) / steps : 0.0;
  std::vector<double> sup(cfg.n_paths);
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, p, cfg.antithetic);
      Walker a{spec, policy, start1, 0.0, start1.y};
      Walker b{spec, policy, start2, 0.0, start2.y};
      double best = std::abs(a.s.y - b.s.y);
      for (int k = 0; k < steps; ++k) {
        a.trade();
        b.trade();
        const double xi = rng.normal();
        a.move(h, xi);
        b.move(h, xi);
        best = std::max(best, std::abs(a.s.y - b.s.y));
      }
      sup[p] = std::pow(best, m);
    }
  });
  const MeanSe ms = mean_and_se(sup);
  CoupledEstimate out;
  out.estimate = ms.mean;
  out.se = ms.se;
  out.n_paths = cfg.n_paths;
  out.scale = std::pow(std::abs(start1.x - start2.x), m) + std::pow(std::abs(start1.y - start2.y), m);
  out.fitted_constant = out.scale > 0.0 ? out.estimate / out.scale : 0.0;
  return out;
}

}  // namespace switchgrid
