#include "switchgrid/grid/export.hpp"

#include <fmt/format.h>

#include "switchgrid/util/hash.hpp"

namespace switchgrid {

nlohmann::json ArtifactHeader::to_json() const {
  return {{"spec_hash", hex64(spec_hash)},
          {"grid_hash", hex64(grid_hash)},
          {"seed", seed},
          {"version", version}};
}

std::string ArtifactHeader::csv_comment() const {
  return fmt::format("# switchgrid version={} spec_hash={} grid_hash={} seed={}\n", version,
                     hex64(spec_hash), hex64(grid_hash), seed);
}

std::string format_real(double v) {
  if (v == 0.0) return "0";
  return fmt::format("{:.17g}", v);
}

namespace {

bool exported(int n, int nt, int stride) {
  return n == nt || (stride > 0 && n % stride == 0) || stride <= 1;
}

}  // namespace

void write_value_csv(std::ostream& out, const ValueField& field, const ArtifactHeader& header, int stride) {
  const GridGeometry& g = field.geometry();
  out << header.csv_comment() << "t,x,y,z,value\n";
  fmt::memory_buffer buf;
  for (int n = 0; n <= g.nt(); ++n) {
    if (!exported(n, g.nt(), stride)) continue;
    for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
      for (int i = 0; i <= g.nx(); ++i) {
        for (int j = g.j_lo(); j <= g.j_hi(z); ++j) {
          fmt::format_to(std::back_inserter(buf), "{},{},{},{},{}\n", format_real(g.t(n)),
                         format_real(g.x(i)), format_real(g.y(z, j)), z, format_real(field.at(n, z, i, j)));
        }
      }
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
}

void write_strategy_csv(std::ostream& out, const StrategyMap& strategy, const ArtifactHeader& header,
                        int stride) {
  const GridGeometry& g = strategy.geometry();
  out << header.csv_comment() << "t,x,y,z,action,target_z\n";
  fmt::memory_buffer buf;
  for (int n = 0; n <= g.nt(); ++n) {
    if (!exported(n, g.nt(), stride)) continue;
    for (int z = g.positions().lowest(); z <= g.positions().highest(); ++z) {
      for (int i = 0; i <= g.nx(); ++i) {
        for (int j = g.j_lo(); j <= g.j_hi(z); ++j) {
          const NodeDecision d = strategy.decision(n, z, i, j);
          const bool sw = d.action == Action::kSwitch;
          fmt::format_to(std::back_inserter(buf), "{},{},{},{},{},{}\n", format_real(g.t(n)),
                         format_real(g.x(i)), format_real(g.y(z, j)), z, sw ? "SWITCH" : "NO_ACTION",
                         sw ? d.target : z);
        }
      }
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
}

nlohmann::json residual_json(const ResidualReport& report, const GridConfig& grid,
                             const ArtifactHeader& header) {
  return {{"artifact", "residuals"},
          {"header", header.to_json()},
          {"grid", to_json(grid)},
          {"report", report.to_json()}};
}

}  // namespace switchgrid
