#pragma once

#include <functional>

#include <nlohmann/json.hpp>

namespace switchgrid {

/// Utility of terminal wealth, extended by 0 on (-inf, 0].
class Utility {
 public:
  Utility(std::function<double(double)> positive_part, nlohmann::json descriptor);

  double operator()(double w) const { return w <= 0.0 ? 0.0 : f_(w); }

  const nlohmann::json& descriptor() const noexcept { return descriptor_; }

 private:
  std::function<double(double)> f_;
  nlohmann::json descriptor_;
};

/// U(w) = w^gamma for 0 < gamma < 1.
Utility power_utility(double gamma);

double utility_eval(const Utility& u, double w);

}  // namespace switchgrid
