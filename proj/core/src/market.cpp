#include "switchgrid/model/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace switchgrid {

MarketModel capped_gbm(double mu, double sigma, double cap) {
  if (!(cap > 0.0)) throw std::invalid_argument("capped_gbm: cap must be positive");
  MarketModel m;
  m.drift = [mu, cap](double, double x) { return mu * std::min(std::max(x, 0.0), cap); };
  m.volatility = [sigma, cap](double, double x) { return sigma * std::min(std::max(x, 0.0), cap); };
  m.lipschitz_const = std::abs(mu) + std::abs(sigma);
  m.sup_bound = (std::abs(mu) + std::abs(sigma)) * cap;
  m.drift_sup = std::abs(mu) * cap;
  m.descriptor = {{"kind", "capped_gbm"}, {"mu", mu}, {"sigma", sigma}, {"cap", cap}};
  return m;
}

MarketModel gbm(double mu, double sigma) {
  MarketModel m;
  m.drift = [mu](double, double x) { return mu * std::max(x, 0.0); };
  m.volatility = [sigma](double, double x) { return sigma * std::max(x, 0.0); };
  m.lipschitz_const = std::abs(mu) + std::abs(sigma);
  m.sup_bound = std::nullopt;
  m.drift_sup = mu == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  m.descriptor = {{"kind", "gbm"}, {"mu", mu}, {"sigma", sigma}};
  return m;
}

namespace {

double piecewise_linear(const std::vector<double>& xs, const std::vector<double>& vs, double x) {
  if (x <= xs.front()) return vs.front();
  if (x >= xs.back()) return vs.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return vs[k - 1] + w * (vs[k] - vs[k - 1]);
}

}  // namespace

MarketModel tabulated_market(std::vector<double> x, std::vector<double> drift,
                             std::vector<double> volatility) {
  if (x.size() < 2 || drift.size() != x.size() || volatility.size() != x.size()) {
    throw std::invalid_argument("tabulated market: tables need equal lengths >= 2");
  }
  if (x.front() != 0.0) throw std::invalid_argument("tabulated market: first node must be x = 0");
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw std::invalid_argument("tabulated market: x must increase");
  }
  double lip = 0.0;
  double sup = 0.0;
  double bsup = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sup = std::max(sup, std::abs(drift[k]) + std::abs(volatility[k]));
    bsup = std::max(bsup, std::abs(drift[k]));
    if (k > 0) {
      const double dx = x[k] - x[k - 1];
      lip = std::max(lip, (std::abs(drift[k] - drift[k - 1]) +
                           std::abs(volatility[k] - volatility[k - 1])) / dx);
    }
  }
  MarketModel m;
  m.descriptor = {{"kind", "table"}, {"x", x}, {"drift", drift}, {"volatility", volatility}};
  m.drift = [x, drift](double, double s) { return piecewise_linear(x, drift, s); };
  m.volatility = [x, volatility](double, double s) { return piecewise_linear(x, volatility, s); };
  m.lipschitz_const = lip;
  m.sup_bound = sup;
  m.drift_sup = bsup;
  return m;
}

}  // namespace switchgrid
