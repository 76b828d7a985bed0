#include "switchgrid/model/cost.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace switchgrid {

CostFunction::CostFunction(int max_trade, std::vector<double> values)
    : max_trade_(max_trade), values_(std::move(values)) {
  if (max_trade < 0) throw std::invalid_argument("cost table: negative trade range");
  if (values_.size() != static_cast<std::size_t>(2 * max_trade + 1)) {
    throw std::invalid_argument("cost table: expected " + std::to_string(2 * max_trade + 1) +
                                " entries, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("cost table: non-finite entry");
  }
}

CostFunction CostFunction::tabulate(int max_trade, const std::function<double(int)>& f) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(2 * max_trade + 1));
  for (int dz = -max_trade; dz <= max_trade; ++dz) values.push_back(f(dz));
  return CostFunction(max_trade, std::move(values));
}

CostFunction CostFunction::fixed_plus_proportional(double fixed, double prop, int max_trade) {
  return tabulate(max_trade, [=](int dz) {
    return dz == 0 ? 0.0 : fixed + prop * std::abs(static_cast<double>(dz));
  });
}

double CostFunction::operator()(int dz) const {
  if (!in_range(dz)) {
    throw std::out_of_range("trade size " + std::to_string(dz) + " outside [-" +
                            std::to_string(max_trade_) + ", " + std::to_string(max_trade_) + "]");
  }
  return values_[static_cast<std::size_t>(dz + max_trade_)];
}

double CostFunction::min_nonzero() const {
  double best = std::numeric_limits<double>::infinity();
  for (int dz = -max_trade_; dz <= max_trade_; ++dz) {
    if (dz != 0) best = std::min(best, (*this)(dz));
  }
  return best;
}

nlohmann::json CostFunction::to_json() const {
  return {{"kind", "table"}, {"max_trade", max_trade_}, {"table", values_}};
}

double cost_eval(const CostFunction& cost, int dz) { return cost(dz); }

namespace {

// 0, 1, -1, 2, -2, ...
std::vector<int> search_order(int r) {
  std::vector<int> order{0};
  for (int k = 1; k <= r; ++k) {
    order.push_back(k);
    order.push_back(-k);
  }
  return order;
}

}  // namespace

SubadditivityResult is_subadditive(const CostFunction& cost) {
  const int r = cost.max_trade();
  const auto order = search_order(r);
  for (std::size_t a = 0; a < order.size(); ++a) {
    for (std::size_t b = a; b < order.size(); ++b) {
      const int z1 = order[a];
      const int z2 = order[b];
      if (!cost.in_range(z1 + z2)) continue;
      const double whole = cost(z1 + z2);
      const double slack = 1e-12 * std::max(1.0, std::abs(whole));
      if (cost(z1) + cost(z2) < whole - slack) return {false, std::make_pair(z1, z2)};
    }
  }
  return {true, std::nullopt};
}

CostFunction subadditivize(const CostFunction& cost, int part_bound) {
  const int r = cost.max_trade();
  if (part_bound < r) throw std::invalid_argument("subadditivize: part_bound below trade range");
  for (double v : cost.table()) {
    if (v < 0.0) throw std::invalid_argument("subadditivize: negative cost");
  }
  // Shortest paths from 0 over states [-B, B] with edges of size 1..R.
  const int b = part_bound;
  const std::size_t n = static_cast<std::size_t>(2 * b + 1);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<bool> done(n, false);
  dist[static_cast<std::size_t>(b)] = 0.0;
  for (std::size_t round = 0; round < n; ++round) {
    std::size_t u = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (!done[k] && dist[k] < inf && (u == n || dist[k] < dist[u])) u = k;
    }
    if (u == n) break;
    done[u] = true;
    const int s = static_cast<int>(u) - b;
    for (int d = -r; d <= r; ++d) {
      if (d == 0 || s + d < -b || s + d > b) continue;
      const std::size_t v = static_cast<std::size_t>(s + d + b);
      const double alt = dist[u] + cost(d);
      if (alt < dist[v]) dist[v] = alt;
    }
  }
  return CostFunction::tabulate(r, [&](int dz) {
    return std::min(cost(dz), dist[static_cast<std::size_t>(dz + b)]);
  });
}

}  // namespace switchgrid
