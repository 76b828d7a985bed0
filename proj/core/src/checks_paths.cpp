#include <algorithm>
#include <cmath>
#include <random>

#include "switchgrid/pathsim/evaluate.hpp"
#include "switchgrid/pathsim/moments.hpp"
#include "switchgrid/pathsim/policy.hpp"
#include "switchgrid/util/hash.hpp"
#include "switchgrid/util/numeric.hpp"
#include "switchgrid/util/parallel.hpp"
#include "switchgrid/verify/checks.hpp"

namespace switchgrid::verify {

namespace {

struct DppNode {
  int n, z, i, j;
  bool no_action;
};

}  // namespace

CheckResult check_dpp_onestep(const ProblemSpec& spec, const GridConfig& grid, const ValueField& field,
                              const StrategyMap& strategy, const DppConfig& cfg) {
  CheckResult r;
  r.name = "dpp_onestep";
  r.seed = cfg.seed;
  r.tolerance = cfg.disc_tol;
  const GridGeometry& g = field.geometry();
  const int ci = std::max(1, static_cast<int>(std::ceil(grid.residual_collar * g.nx())));
  std::mt19937_64 rng(cfg.seed);
  std::vector<DppNode> nodes;
  const int want_switch = std::max(1, cfg.nodes / 4);
  int have_switch = 0;
  int have_hold = 0;
  for (int attempt = 0; attempt < 200 * cfg.nodes && have_hold + have_switch < cfg.nodes + want_switch; ++attempt) {
    const int n = std::uniform_int_distribution<int>(0, g.nt() - 1)(rng);
    const int zi = std::uniform_int_distribution<int>(0, g.positions().size() - 1)(rng);
    const int z = g.positions().at(zi);
    const int rows = g.j_hi(z);
    const int cj = std::max(1, static_cast<int>(std::ceil(grid.residual_collar * rows)));
    if (rows - cj <= cj || g.nx() - ci <= ci) continue;
    const int i = std::uniform_int_distribution<int>(ci, g.nx() - ci)(rng);
    const int j = std::uniform_int_distribution<int>(cj, rows - cj)(rng);
    const bool hold = strategy.decision(n, z, i, j).action == Action::kNoAction;
    if (hold && have_hold < cfg.nodes) {
      nodes.push_back({n, z, i, j, true});
      ++have_hold;
    } else if (!hold && have_switch < want_switch) {
      nodes.push_back({n, z, i, j, false});
      ++have_switch;
    }
  }

  struct NodeResult {
    double v = 0, mean = 0, se = 0;
  };
  std::vector<NodeResult> res(nodes.size());
  parallel_for(nodes.size(), cfg.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const DppNode& nd = nodes[k];
      const double t0 = g.t(nd.n);
      const double x0 = g.x(nd.i);
      const double y0 = g.y(nd.z, nd.j);
      const double floor = spec.cost(-nd.z);
      const double h = g.dt() / cfg.substeps;
      std::vector<double> vals(cfg.paths);
      for (std::size_t p = 0; p < cfg.paths; ++p) {
        PathRng prng(mix_seed(cfg.seed, k), p, false);
        double x = x0, y = y0, t = t0;
        bool stopped = false;
        for (int s = 0; s < cfg.substeps; ++s) {
          const double xn = euler_step(spec, t, x, h, prng.normal());
          y += nd.z * (xn - x);
          x = xn;
          t += h;
          if (nd.z != 0 && y <= floor) {
            stopped = true;
            break;
          }
        }
        vals[p] = stopped ? 0.0 : field.sample(t0 + g.dt(), nd.z, x, y);
      }
      const MeanSe ms = mean_and_se(vals);
      res[k] = {field.at(nd.n, nd.z, nd.i, nd.j), ms.mean, ms.se};
    }
  });

  nlohmann::json list = nlohmann::json::array();
  int fails = 0;
  double worst = -1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const DppNode& nd = nodes[k];
    const double tol = std::max(3.0 * res[k].se, cfg.disc_tol);
    const double diff = res[k].mean - res[k].v;
    const bool ok = nd.no_action ? std::abs(diff) <= tol : diff <= tol;
    const double excess = (nd.no_action ? std::abs(diff) : diff) - tol;
    nlohmann::json e = {{"t", g.t(nd.n)}, {"z", nd.z}, {"x", g.x(nd.i)}, {"y", g.y(nd.z, nd.j)},
                        {"region", nd.no_action ? "no_action" : "switch"}, {"V", res[k].v},
                        {"mc_mean", res[k].mean}, {"mc_se", res[k].se}, {"tolerance", tol}};
    if (!ok) {
      ++fails;
      if (excess > worst) {
        worst = excess;
        r.witness = e;
      }
    }
    list.push_back(e);
  }
  r.samples = nodes.size() * cfg.paths;
  r.passed = fails == 0 && have_hold > 0;
  if (have_hold == 0) r.witness = {{"reason", "no interior no-action node sampled"}};
  r.details = {{"no_action_nodes", have_hold}, {"switch_nodes", have_switch}, {"paths_per_node", cfg.paths},
               {"substeps", cfg.substeps}, {"failures", fails}, {"nodes", list}};
  return r;
}

namespace {

// Crossing indicators for every monitoring step in cfg.dt_list. All levels
// read the same fine Brownian increments; coarse steps sum them.
template <class Advance, class Crossed>
std::vector<std::vector<double>> nested_crossings(const ExitConfig& cfg, double x0, Advance&& advance,
                                                  Crossed&& crossed) {
  const double fine = *std::min_element(cfg.dt_list.begin(), cfg.dt_list.end());
  const auto fine_steps = static_cast<long>(std::llround(cfg.delta / fine));
  const std::size_t levels = cfg.dt_list.size();
  std::vector<long> ratio(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    const double q = cfg.dt_list[l] / fine;
    ratio[l] = std::max(1L, static_cast<long>(std::llround(q)));
    if (std::abs(q - static_cast<double>(ratio[l])) > 1e-6 * q) {
      throw std::invalid_argument("dt_list entries must be integer multiples of the finest step");
    }
  }
  std::vector<std::vector<double>> hit(levels, std::vector<double>(cfg.paths, 0.0));
  parallel_for(cfg.paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(levels), acc(levels), t(levels);
    std::vector<long> count(levels);
    std::vector<char> done(levels);
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, p, false);
      std::fill(x.begin(), x.end(), x0);
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(t.begin(), t.end(), 0.0);
      std::fill(count.begin(), count.end(), 0L);
      std::fill(done.begin(), done.end(), 0);
      std::size_t open = levels;
      for (long s = 0; s < fine_steps && open > 0; ++s) {
        const double xi = rng.normal();
        for (std::size_t l = 0; l < levels; ++l) {
          if (done[l]) continue;
          acc[l] += xi;
          if (++count[l] < ratio[l]) continue;
          const double h = cfg.dt_list[l];
          x[l] = advance(t[l], x[l], h, acc[l] / std::sqrt(static_cast<double>(ratio[l])));
          t[l] += h;
          acc[l] = 0.0;
          count[l] = 0;
          if (crossed(x[l])) {
            hit[l][p] = 1.0;
            done[l] = 1;
            --open;
          }
        }
      }
    }
  });
  return hit;
}

CheckResult exit_result(const std::string& name, const ExitConfig& cfg,
                        const std::vector<std::vector<double>>& hit) {
  CheckResult r;
  r.name = name;
  r.seed = cfg.seed;
  r.tolerance = cfg.level;
  r.samples = cfg.paths;
  // Levels ordered coarse to fine.
  std::vector<std::size_t> order(cfg.dt_list.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return cfg.dt_list[a] > cfg.dt_list[b]; });
  nlohmann::json est = nlohmann::json::array();
  bool monotone = true;
  nlohmann::json bad;
  std::vector<double> p(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const MeanSe ms = mean_and_se(hit[order[k]]);
    p[k] = ms.mean;
    est.push_back({{"dt", cfg.dt_list[order[k]]}, {"probability", ms.mean}, {"se", ms.se}});
    if (k > 0) {
      std::vector<double> diff(cfg.paths);
      for (std::size_t q = 0; q < cfg.paths; ++q) diff[q] = hit[order[k]][q] - hit[order[k - 1]][q];
      const MeanSe d = mean_and_se(diff);
      if (d.mean < -3.0 * d.se && d.mean < 0.0) {
        monotone = false;
        if (bad.is_null()) bad = {{"dt_coarse", cfg.dt_list[order[k - 1]]}, {"dt_fine", cfg.dt_list[order[k]]},
                                  {"drop", d.mean}, {"se", d.se}};
      }
    }
  }
  const double finest = p.back();
  const bool reaches = finest > cfg.level;
  r.passed = monotone && reaches;
  if (!monotone) r.witness = {{"kind", "not_monotone"}, {"at", bad}};
  if (monotone && !reaches) r.witness = {{"kind", "below_level"}, {"probability", finest}, {"level", cfg.level}};
  r.details = {{"delta", cfg.delta}, {"level", cfg.level}, {"estimates", est}, {"monotone", monotone},
               {"confidence", "monotonicity tested at 3 SE of paired differences"}};
  return r;
}

}  // namespace

CheckResult check_immediate_exit(const ProblemSpec& spec, const PortfolioState& start, const ExitConfig& cfg) {
  const int z = start.z;
  const double floor = spec.cost(-z);
  const double x0 = start.x;
  struct State {
    double x, y;
  };
  // Same nested monitoring as nested_crossings, with wealth carried along.
  const double fine = *std::min_element(cfg.dt_list.begin(), cfg.dt_list.end());
  const auto fine_steps = static_cast<long>(std::llround(cfg.delta / fine));
  const std::size_t levels = cfg.dt_list.size();
  std::vector<long> ratio(levels);
  for (std::size_t l = 0; l < levels; ++l) ratio[l] = std::max(1L, static_cast<long>(std::llround(cfg.dt_list[l] / fine)));
  std::vector<std::vector<double>> hit(levels, std::vector<double>(cfg.paths, 0.0));
  parallel_for(cfg.paths, cfg.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<State> s(levels);
    std::vector<double> acc(levels), t(levels);
    std::vector<long> count(levels);
    std::vector<char> done(levels);
    for (std::size_t p = begin; p < end; ++p) {
      PathRng rng(cfg.seed, p, false);
      std::fill(s.begin(), s.end(), State{x0, start.y});
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(t.begin(), t.end(), start.t);
      std::fill(count.begin(), count.end(), 0L);
      std::fill(done.begin(), done.end(), 0);
      std::size_t open = levels;
      for (long k = 0; k < fine_steps && open > 0; ++k) {
        const double xi = rng.normal();
        for (std::size_t l = 0; l < levels; ++l) {
          if (done[l]) continue;
          acc[l] += xi;
          if (++count[l] < ratio[l]) continue;
          const double h = cfg.dt_list[l];
          const double xn = euler_step(spec, t[l], s[l].x, h, acc[l] / std::sqrt(static_cast<double>(ratio[l])));
          s[l].y += z * (xn - s[l].x);
          s[l].x = xn;
          t[l] += h;
          acc[l] = 0.0;
          count[l] = 0;
          if (s[l].y < floor) {
            hit[l][p] = 1.0;
            done[l] = 1;
            --open;
          }
        }
      }
    }
  });
  CheckResult r = exit_result("immediate_exit", cfg, hit);
  r.details["start"] = {{"t", start.t}, {"x", start.x}, {"y", start.y}, {"z", start.z}, {"floor", floor}};
  return r;
}

std::vector<double> crossing_probabilities(const ItoProcess& process, const ExitConfig& cfg) {
  const auto hit = nested_crossings(
      cfg, 0.0,
      [&](double t, double x, double h, double xi) {
        return x + process.drift(t, x) * h + process.volatility(t, x) * std::sqrt(h) * xi;
      },
      [](double x) { return x > 0.0; });
  std::vector<double> out;
  for (const auto& h : hit) out.push_back(mean_and_se(h).mean);
  return out;
}

CheckResult check_ito_crossing(const std::string& name, const ItoProcess& process, const ExitConfig& cfg) {
  const auto hit = nested_crossings(
      cfg, 0.0,
      [&](double t, double x, double h, double xi) {
        return x + process.drift(t, x) * h + process.volatility(t, x) * std::sqrt(h) * xi;
      },
      [](double x) { return x > 0.0; });
  return exit_result(name, cfg, hit);
}

CheckResult check_moment_bounds(const ProblemSpec& spec, const MomentConfig& cfg) {
  CheckResult r;
  r.name = "moment_bounds";
  r.seed = cfg.seed;
  r.tolerance = cfg.band;
  const HoldPolicy hold;
  PathConfig pc;
  pc.n_paths = cfg.paths;
  pc.dt = cfg.dt;
  pc.seed = cfg.seed;
  pc.threads = cfg.threads;
  nlohmann::json sweep = nlohmann::json::array();
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (double x : cfg.x_sweep) {
    const MomentEstimate e = moment_statistics(spec, {0.0, x, cfg.y, cfg.z}, pc, cfg.m, hold);
    const double scale = std::pow(x, cfg.m);
    // 0/0 at x = 0 is a pass.
    const double ratio = scale > 0.0 ? e.estimate / scale : 0.0;
    if (scale > 0.0) {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    sweep.push_back({{"x", x}, {"estimate", e.estimate}, {"se", e.se}, {"ratio", ratio}});
  }
  const bool band_ok = hi == 0.0 || (lo > 0.0 && hi / lo <= cfg.band);

  PathConfig cc = pc;
  cc.seed = mix_seed(cfg.seed, 1);
  const PortfolioState base{0.0, cfg.coupled_x, cfg.y, cfg.z};
  const double d0 = cfg.coupled_d0;
  const CoupledEstimate big =
      coupled_paths(spec, base, {0.0, cfg.coupled_x + d0, cfg.y + d0, cfg.z}, cc, cfg.m, hold);
  const CoupledEstimate small =
      coupled_paths(spec, base, {0.0, cfg.coupled_x + 0.5 * d0, cfg.y + 0.5 * d0, cfg.z}, cc, cfg.m, hold);
  const double expected = std::pow(2.0, cfg.m);
  const double shrink = small.estimate > 0.0 ? big.estimate / small.estimate : 0.0;
  const double exponent = shrink > 0.0 ? std::log2(shrink) : 0.0;
  const bool coupled_ok = std::abs(shrink / expected - 1.0) <= cfg.coupled_tol;
  r.samples = cfg.paths * (cfg.x_sweep.size() + 2);
  r.passed = band_ok && coupled_ok;
  if (!band_ok) r.witness = {{"kind", "band"}, {"min_ratio", lo}, {"max_ratio", hi}, {"band", cfg.band}};
  if (band_ok && !coupled_ok) {
    r.witness = {{"kind", "coupled"}, {"shrink", shrink}, {"expected", expected}, {"tolerance", cfg.coupled_tol}};
  }
  r.details = {{"m", cfg.m},
               {"sweep", sweep},
               {"band_ratio", hi > 0.0 && lo > 0.0 ? hi / lo : 0.0},
               {"coupled",
                {{"d", {d0, 0.5 * d0}},
                 {"estimates", {big.estimate, small.estimate}},
                 {"se", {big.se, small.se}},
                 {"fitted_constant", {big.fitted_constant, small.fitted_constant}},
                 {"shrink", shrink},
                 {"fitted_exponent", exponent}}}};
  return r;
}

CheckResult check_pde_mc(const ProblemSpec& spec, const ValueField& field, const StrategyMap& strategy,
                         const CrossValidationConfig& cfg) {
  CheckResult r;
  r.name = "pde_mc";
  r.seed = cfg.seed;
  const FieldStrategyPolicy policy(spec, field, strategy);
  PathConfig pc;
  pc.n_paths = cfg.paths;
  pc.dt = cfg.dt;
  pc.seed = cfg.seed;
  pc.threads = cfg.threads;
  const EvalReport rep = evaluate_strategy(spec, policy, cfg.start, pc);
  const double v = field.sample(cfg.start.t, cfg.start.z, cfg.start.x, cfg.start.y);
  const double tol = std::max(2.0 * rep.se, cfg.rel_tol * std::abs(v));
  r.tolerance = tol;
  r.samples = rep.n_paths;
  r.passed = std::abs(rep.mean - v) <= tol;
  if (!r.passed) r.witness = {{"V", v}, {"mc_mean", rep.mean}, {"mc_se", rep.se}, {"tolerance", tol}};
  r.details = {{"V", v}, {"evaluation", rep.to_json()}, {"abs_difference", std::abs(rep.mean - v)},
               {"start", {{"t", cfg.start.t}, {"x", cfg.start.x}, {"y", cfg.start.y}, {"z", cfg.start.z}}}};
  return r;
}

}  // namespace switchgrid::verify
