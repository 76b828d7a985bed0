#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace switchgrid {

using RateFunction = std::function<double(double t, double x)>;

/// Coefficients of dX = b(t,X) dt + sigma(t,X) dW.
struct MarketModel {
  RateFunction drift;
  RateFunction volatility;
  double lipschitz_const = 0.0;          ///< C1
  std::optional<double> sup_bound;       ///< C4, present when b and sigma are bounded
  double drift_sup = 0.0;                ///< sup |b|, +inf when unbounded
  nlohmann::json descriptor;             ///< canonical description, used for hashing
};

/// b = mu * min(x, cap), sigma = s * min(x, cap).
MarketModel capped_gbm(double mu, double sigma, double cap);

/// b = mu * x, sigma = s * x. Not bounded.
MarketModel gbm(double mu, double sigma);

/// Piecewise-linear coefficients on a price table, constant beyond the last
/// node. The table must start at x = 0.
MarketModel tabulated_market(std::vector<double> x, std::vector<double> drift,
                             std::vector<double> volatility);

}  // namespace switchgrid
