#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "switchgrid/grid/residual.hpp"
#include "switchgrid/grid/strategy.hpp"
#include "switchgrid/grid/value_field.hpp"

namespace switchgrid {

/// Provenance stamped on every artifact.
struct ArtifactHeader {
  std::uint64_t spec_hash = 0;
  std::uint64_t grid_hash = 0;
  std::uint64_t seed = 0;
  std::string version = SWITCHGRID_VERSION;

  nlohmann::json to_json() const;
  /// "# key=value" comment line for CSV files.
  std::string csv_comment() const;
};

/// Slices are written every `stride` time steps, always including 0 and nt.
void write_value_csv(std::ostream& out, const ValueField& field, const ArtifactHeader& header,
                     int stride = 1);
void write_strategy_csv(std::ostream& out, const StrategyMap& strategy, const ArtifactHeader& header,
                        int stride = 1);

nlohmann::json residual_json(const ResidualReport& report, const GridConfig& grid,
                             const ArtifactHeader& header);

/// Fixed-precision formatting used by every CSV writer.
std::string format_real(double v);

}  // namespace switchgrid
