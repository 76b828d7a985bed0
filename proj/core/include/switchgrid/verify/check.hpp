#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace switchgrid::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double tolerance = 0.0;
  nlohmann::json witness;  ///< worst-case location and values; set on failure
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> warnings;
  double wall_time = 0.0;  ///< seconds, reported separately from the deterministic body

  /// Deterministic fields only; wall_time is excluded.
  nlohmann::json to_json() const;
};

}  // namespace switchgrid::verify
