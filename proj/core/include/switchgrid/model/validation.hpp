#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchgrid/model/problem.hpp"

namespace switchgrid {

struct ValidationEntry {
  std::string name;
  bool passed = true;
  bool warning_only = false;  ///< failure is reported but does not fail the spec
  std::string witness;        ///< first violating sample, empty on pass
};

struct ValidationReport {
  std::vector<ValidationEntry> entries;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  bool ok() const;
  const ValidationEntry* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

/// Checks every standing assumption on `samples` random points drawn from
/// a generator seeded with `seed`. Entry names:
///   drift_zero_at_origin, volatility_zero_at_origin, lipschitz, bounded,
///   cost_zero_at_zero, cost_positive, cost_subadditive,
///   utility_zero_at_zero, utility_increasing, utility_concave,
///   utility_zero_below_zero, positions_contain_zero, nondegeneracy.
/// `bounded` is a warning when the market declares no sup bound;
/// `nondegeneracy` is always a warning.
ValidationReport validate_spec(const ProblemSpec& spec, std::size_t samples,
                               std::uint64_t seed = 0);

}  // namespace switchgrid
