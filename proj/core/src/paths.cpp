#include "switchgrid/pathsim/paths.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/hash.hpp"
#include "switchgrid/util/parallel.hpp"

namespace switchgrid {

PathRng::PathRng(std::uint64_t seed, std::size_t path, bool antithetic)
    : engine_(mix_seed(seed, antithetic ? path / 2 : path)),
      sign_(antithetic && (path % 2 == 1) ? -1.0 : 1.0) {}

double PathRng::normal() { return sign_ * dist_(engine_); }

int step_count(double t0, double horizon, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  const double remaining = horizon - t0;
  if (remaining < -1e-12) throw std::invalid_argument("start time beyond the horizon");
  if (remaining <= 1e-12) return 0;
  const double steps = std::round(remaining / dt);
  if (std::abs(steps * dt - remaining) > dt) {
    throw std::invalid_argument(fmt::format("dt={} does not divide the remaining horizon {}", dt, remaining));
  }
  return std::max(1, static_cast<int>(steps));
}

double euler_step(const ProblemSpec& spec, double t, double x, double dt, double normal) {
  if (x <= 0.0) return 0.0;
  const double next = x + spec.market.drift(t, x) * dt + spec.market.volatility(t, x) * std::sqrt(dt) * normal;
  return next > 0.0 ? next : 0.0;
}

PriceBundle simulate_paths(const ProblemSpec& spec, const PortfolioState& start, const PathConfig& cfg) {
  if (start.x < 0.0) throw std::invalid_argument("start price must be nonnegative");
  if (cfg.n_paths < 1) throw std::invalid_argument("n_paths must be at least 1");
  PriceBundle bundle;
  bundle.n_paths = cfg.n_paths;
  bundle.steps = step_count(start.t, spec.horizon, cfg.dt);
  bundle.t0 = start.t;
  bundle.dt = bundle.steps > 0 ? (spec.horizon - start.t) / bundle.steps : cfg.dt;
  const std::size_t row = static_cast<std::size_t>(bundle.steps + 1);
  bundle.x.assign(cfg.n_paths * row, 0.0);
  parallel_for(cfg.n_paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, p, cfg.antithetic);
      double x = start.x;
      bundle.x[p * row] = x;
      for (int k = 0; k < bundle.steps; ++k) {
        const double xi = rng.normal();
        x = euler_step(spec, bundle.t0 + k * bundle.dt, x, bundle.dt, xi);
        bundle.x[p * row + static_cast<std::size_t>(k + 1)] = x;
      }
    }
  });
  return bundle;
}

double wealth_step(const PortfolioState& state, double dx) { return state.y + state.z * dx; }

std::pair<PortfolioState, SwitchEvent> apply_switch(const ProblemSpec& spec, const PortfolioState& state,
                                                    int target) {
  if (target == state.z) {
    throw AdmissibilityError(fmt::format("switch target {} equals the current position", target));
  }
  if (!spec.positions.contains(target)) {
    throw AdmissibilityError(fmt::format("switch target {} outside the position set", target));
  }
  if (!in_gamma(spec, state.y, state.z, target)) {
    throw AdmissibilityError(fmt::format(
        "switch {} -> {} needs wealth {} but only {} is available", state.z, target,
        spec.cost(target - state.z) + spec.cost(-target), state.y));
  }
  const double cost = spec.cost(target - state.z);
  PortfolioState next = state;
  next.y -= cost;
  next.z = target;
  return {next, SwitchEvent{state.t, state.z, target, cost}};
}

bool detect_margin_call(const ProblemSpec& spec, const PortfolioState& state) {
  return state.y <= spec.cost(-state.z);
}

}  // namespace switchgrid
