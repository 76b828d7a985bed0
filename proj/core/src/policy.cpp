#include "switchgrid/pathsim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include "switchgrid/util/errors.hpp"

namespace switchgrid {

PolicyDecision ConstantPolicy::decide(const PortfolioState& state) const {
  if (state.z != z_ && in_gamma(*spec_, state.y, state.z, z_)) return {z_, true};
  return {};
}

FieldStrategyPolicy::FieldStrategyPolicy(const ProblemSpec& spec, const ValueField& field,
                                         const StrategyMap& strategy)
    : spec_(&spec), field_(&field), strategy_(&strategy) {}

std::optional<double> FieldStrategyPolicy::gap_at(int n, int z, double x, double y) const {
  const GridGeometry& g = field_->geometry();
  const double xf = std::clamp(x / g.dx(), 0.0, static_cast<double>(g.nx()));
  const int i0 = std::min(static_cast<int>(std::floor(xf)), g.nx() - 1);
  const double wx = xf - i0;
  const double top = static_cast<double>(g.j_hi(z));
  const double jf = std::clamp((y - g.floor(z)) / g.dy(), static_cast<double>(g.j_lo()), top);
  const int j0 = std::min(static_cast<int>(std::floor(jf)), g.j_hi(z) - 1);
  const double wy = jf - j0;
  double acc = 0.0;
  for (int di = 0; di <= 1; ++di) {
    for (int dj = 0; dj <= 1; ++dj) {
      const double w = (di ? wx : 1.0 - wx) * (dj ? wy : 1.0 - wy);
      if (w == 0.0) continue;
      // Nodes without an admissible switch count with their value as gap.
      const auto gap = strategy_->gap(n, z, i0 + di, j0 + dj);
      acc += w * gap.value_or(field_->at(n, z, i0 + di, j0 + dj));
    }
  }
  return acc;
}

PolicyDecision FieldStrategyPolicy::decide(const PortfolioState& s) const {
  const GridGeometry& g = field_->geometry();
  PolicyDecision out;
  out.covered = s.x >= 0.0 && s.x <= g.x(g.nx()) + 1e-12 && s.y <= g.y_top(s.z) + 1e-12;
  const auto candidates = gamma_set(*spec_, s.y, s.z);
  if (candidates.empty()) return out;
  const double nf = std::clamp(s.t / g.dt(), 0.0, static_cast<double>(g.nt()));
  const int n0 = std::min(static_cast<int>(std::floor(nf)), g.nt() - 1);
  const double w = nf - n0;
  double gap = *gap_at(n0, s.z, s.x, s.y);
  if (w > 1e-12) gap = (1.0 - w) * gap + w * *gap_at(n0 + 1, s.z, s.x, s.y);
  if (gap > strategy_->strict_tol()) return out;

  // Best admissible target at the actual state, ties to smallest |z|, then z.
  std::vector<int> order = candidates;
  std::stable_sort(order.begin(), order.end(), [](int a, int b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
  });
  double best = 0.0;
  bool have = false;
  for (int zt : order) {
    const double v = field_->sample(s.t, zt, s.x, s.y - spec_->cost(zt - s.z));
    if (!have || v > best + 1e-12 * std::max(1.0, std::abs(best))) {
      best = v;
      out.target = zt;
      have = true;
    }
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::size_t nearest(const std::vector<double>& axis, double v) {
  const auto it = std::lower_bound(axis.begin(), axis.end(), v);
  if (it == axis.begin()) return 0;
  if (it == axis.end()) return axis.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  return (v - axis[hi - 1] <= axis[hi] - v) ? hi - 1 : hi;
}

}  // namespace

TabulatedPolicy::TabulatedPolicy(const ProblemSpec& spec, std::istream& csv) : spec_(&spec) {
  struct Row {
    double t, x, y;
    int z;
    int target;
  };
  std::vector<Row> rows;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("t,x,y,z,action,target_z", 0) != 0) {
        throw ConfigError("strategy", "unexpected strategy CSV header");
      }
      header = true;
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 6) throw ConfigError("strategy", "malformed row at line " + std::to_string(lineno));
    try {
      Row r{std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stoi(cells[3]), -128};
      if (cells[4] == "SWITCH") {
        r.target = std::stoi(cells[5]);
      } else if (cells[4] != "NO_ACTION") {
        throw ConfigError("strategy", "unknown action at line " + std::to_string(lineno));
      }
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("strategy", "unparsable row at line " + std::to_string(lineno));
    }
  }
  if (rows.empty()) throw ConfigError("strategy", "strategy CSV has no rows");
  rows_ = rows.size();

  std::set<double> times;
  for (const auto& r : rows) times.insert(r.t);
  times_.assign(times.begin(), times.end());
  tables_.resize(times_.size());
  std::vector<std::map<int, std::pair<std::set<double>, std::set<double>>>> axes(times_.size());
  auto tindex = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
  };
  for (const auto& r : rows) {
    auto& ax = axes[tindex(r.t)][r.z];
    ax.first.insert(r.x);
    ax.second.insert(r.y);
  }
  for (std::size_t n = 0; n < times_.size(); ++n) {
    for (auto& [z, ax] : axes[n]) {
      Table& tab = tables_[n][z];
      tab.xs.assign(ax.first.begin(), ax.first.end());
      tab.ys.assign(ax.second.begin(), ax.second.end());
      tab.target.assign(tab.xs.size() * tab.ys.size(), -128);
    }
  }
  for (const auto& r : rows) {
    Table& tab = tables_[tindex(r.t)][r.z];
    const std::size_t ix = nearest(tab.xs, r.x);
    const std::size_t iy = nearest(tab.ys, r.y);
    tab.target[ix * tab.ys.size() + iy] = static_cast<std::int8_t>(r.target);
  }
}

PolicyDecision TabulatedPolicy::decide(const PortfolioState& s) const {
  PolicyDecision out;
  auto it = std::upper_bound(times_.begin(), times_.end(), s.t + 1e-12);
  if (it == times_.begin()) {
    out.covered = false;
    return out;
  }
  const std::size_t n = static_cast<std::size_t>(it - times_.begin()) - 1;
  const auto found = tables_[n].find(s.z);
  if (found == tables_[n].end()) {
    out.covered = false;
    return out;
  }
  const Table& tab = found->second;
  out.covered = s.x >= tab.xs.front() - 1e-12 && s.x <= tab.xs.back() + 1e-12 &&
                s.y >= tab.ys.front() - 1e-12 && s.y <= tab.ys.back() + 1e-12;
  const int target = tab.target[nearest(tab.xs, s.x) * tab.ys.size() + nearest(tab.ys, s.y)];
  if (target != -128 && in_gamma(*spec_, s.y, s.z, target)) out.target = target;
  return out;
}

}  // namespace switchgrid
