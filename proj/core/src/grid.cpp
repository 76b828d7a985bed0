#include "switchgrid/grid/grid.hpp"

#include <cmath>

#include "switchgrid/model/json_util.hpp"
#include "switchgrid/util/errors.hpp"
#include "switchgrid/util/hash.hpp"

namespace switchgrid {

std::string to_string(TimeStepping s) { return s == TimeStepping::kImplicit ? "implicit" : "explicit"; }

std::string to_string(Interpolation i) {
  return i == Interpolation::kLinear ? "linear" : "monotone_cubic";
}

nlohmann::json to_json(const GridConfig& g) {
  return {{"nx", g.nx},
          {"ny", g.ny},
          {"nt", g.nt},
          {"x_max", g.x_max},
          {"y_max", g.y_max},
          {"y_below", g.y_below},
          {"epsilon_list", g.epsilon_list},
          {"intervention_tol", g.intervention_tol},
          {"max_intervention_iters", g.max_intervention_iters},
          {"stepping", to_string(g.stepping)},
          {"interpolation", to_string(g.interpolation)},
          {"strict_tol", g.strict_tol},
          {"residual_collar", g.residual_collar}};
}

std::uint64_t grid_hash(const GridConfig& grid) { return fnv1a(to_json(grid).dump()); }

GridConfig grid_from_json(const nlohmann::json& doc, const std::string& p) {
  using namespace json_util;
  GridConfig g;
  require_object(doc, p);
  auto positive_int = [&](const char* key, int fallback) {
    const long long v = get_integer(doc, key, p, fallback);
    if (v < 1 || v > 100000) throw ConfigError(join(p, key), "must be a positive integer");
    return static_cast<int>(v);
  };
  auto positive_real = [&](const char* key, double fallback) {
    const double v = get_number(doc, key, p, fallback);
    if (!(v > 0.0)) throw ConfigError(join(p, key), "must be positive");
    return v;
  };
  g.nx = positive_int("nx", g.nx);
  g.ny = positive_int("ny", g.ny);
  g.nt = positive_int("nt", g.nt);
  g.x_max = positive_real("x_max", g.x_max);
  g.y_max = positive_real("y_max", g.y_max);
  g.y_below = positive_real("y_below", g.y_below);
  g.intervention_tol = positive_real("intervention_tol", g.intervention_tol);
  g.strict_tol = get_number(doc, "strict_tol", p, g.strict_tol);
  if (g.strict_tol < 0.0) throw ConfigError(join(p, "strict_tol"), "must be nonnegative");
  g.residual_collar = get_number(doc, "residual_collar", p, g.residual_collar);
  if (g.residual_collar < 0.0 || g.residual_collar >= 0.5) {
    throw ConfigError(join(p, "residual_collar"), "must lie in [0, 0.5)");
  }
  const long long iters = get_integer(doc, "max_intervention_iters", p, g.max_intervention_iters);
  if (iters < 0 || iters > 1000000) {
    throw ConfigError(join(p, "max_intervention_iters"), "must be a nonnegative integer");
  }
  g.max_intervention_iters = static_cast<int>(iters);
  if (doc.contains("epsilon_list")) {
    g.epsilon_list = get_number_array(doc, "epsilon_list", p);
    if (g.epsilon_list.empty()) throw ConfigError(join(p, "epsilon_list"), "must not be empty");
    for (std::size_t k = 0; k < g.epsilon_list.size(); ++k) {
      if (!(g.epsilon_list[k] > 0.0) || (k > 0 && !(g.epsilon_list[k] < g.epsilon_list[k - 1]))) {
        throw ConfigError(join(p, "epsilon_list"), "must be positive and strictly decreasing");
      }
    }
  }
  const std::string stepping = get_string(doc, "stepping", p, to_string(g.stepping));
  if (stepping == "implicit") {
    g.stepping = TimeStepping::kImplicit;
  } else if (stepping == "explicit") {
    g.stepping = TimeStepping::kExplicit;
  } else {
    throw ConfigError(join(p, "stepping"), "expected 'implicit' or 'explicit'");
  }
  const std::string interp = get_string(doc, "interpolation", p, to_string(g.interpolation));
  if (interp == "linear") {
    g.interpolation = Interpolation::kLinear;
  } else if (interp == "monotone_cubic") {
    g.interpolation = Interpolation::kMonotoneCubic;
  } else {
    throw ConfigError(join(p, "interpolation"), "expected 'linear' or 'monotone_cubic'");
  }
  g.threads = positive_int("threads", g.threads);
  return g;
}

GridGeometry::GridGeometry(const ProblemSpec& spec, const GridConfig& grid, SolveKind kind)
    : positions_(spec.positions), kind_(kind), nx_(grid.nx), nt_(grid.nt) {
  if (grid.nx < 2 || grid.ny < 2 || grid.nt < 1) {
    throw ConfigError("grid", "nx and ny must be at least 2 and nt at least 1");
  }
  if (!(grid.x_max > 0.0) || !(grid.y_max > 0.0)) throw ConfigError("grid", "x_max and y_max must be positive");
  dx_ = grid.x_max / grid.nx;
  dy_ = grid.y_max / grid.ny;
  dt_ = spec.horizon / grid.nt;
  const double ratio = dx_ / dy_;
  shear_ = static_cast<int>(std::lround(ratio));
  const bool trades = positions_.c2 > 0 || positions_.c3 > 0;
  if (trades && (shear_ < 1 || std::abs(ratio - shear_) > 1e-9 * ratio)) {
    throw ConfigError("grid", "x_max/nx must be an integer multiple of y_max/ny when trading is possible");
  }
  if (!trades) shear_ = std::max(shear_, 1);

  j_lo_ = 0;
  if (kind == SolveKind::kPenalized) {
    j_lo_ = -static_cast<int>(std::lround(grid.y_below / dy_));
    if (j_lo_ > -1) j_lo_ = -1;
  }
  for (int z = positions_.lowest(); z <= positions_.highest(); ++z) {
    const double f = spec.cost(-z);
    const int top = static_cast<int>(std::floor((grid.y_max - f) / dy_ + 1e-9));
    if (top < 2) throw ConfigError("grid.y_max", "must leave at least two rows above every solvency floor");
    floors_.push_back(f);
    j_hi_.push_back(top);
  }
}

}  // namespace switchgrid
