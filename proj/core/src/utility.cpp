#include "switchgrid/model/utility.hpp"

#include <cmath>
#include <stdexcept>

namespace switchgrid {

Utility::Utility(std::function<double(double)> positive_part, nlohmann::json descriptor)
    : f_(std::move(positive_part)), descriptor_(std::move(descriptor)) {
  if (!f_) throw std::invalid_argument("utility: empty function");
}

Utility power_utility(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("power utility: gamma must lie in (0, 1)");
  }
  if (gamma == 0.5) {
    return Utility([](double w) { return std::sqrt(w); }, {{"kind", "power"}, {"gamma", gamma}});
  }
  return Utility([gamma](double w) { return std::pow(w, gamma); },
                 {{"kind", "power"}, {"gamma", gamma}});
}

double utility_eval(const Utility& u, double w) { return u(w); }

}  // namespace switchgrid
