#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "switchgrid/model/problem.hpp"

namespace switchgrid {

enum class TimeStepping { kImplicit, kExplicit };
enum class Interpolation { kLinear, kMonotoneCubic };

struct GridConfig {
  int nx = 200;
  int ny = 200;
  int nt = 50;
  double x_max = 20.0;
  double y_max = 10.0;
  /// Depth of the extension below each floor used by the penalized solve.
  double y_below = 1.0;
  std::vector<double> epsilon_list{1e-1, 1e-2, 1e-3, 1e-4};
  double intervention_tol = 1e-12;
  int max_intervention_iters = 100;
  TimeStepping stepping = TimeStepping::kImplicit;
  Interpolation interpolation = Interpolation::kLinear;
  /// A node is no-action iff V > SV + strict_tol.
  double strict_tol = 1e-10;
  /// Fraction of each axis excluded from the residual interior.
  double residual_collar = 0.1;
  /// Worker threads. Not part of the grid hash: results do not depend on it.
  int threads = 1;
};

/// Hash over every field that affects numerical results.
std::uint64_t grid_hash(const GridConfig& grid);

nlohmann::json to_json(const GridConfig& grid);

/// Reads the keys present in `doc` over the defaults. Throws ConfigError.
GridConfig grid_from_json(const nlohmann::json& doc, const std::string& key_prefix = "grid");

std::string to_string(TimeStepping s);
std::string to_string(Interpolation i);

enum class SolveKind { kConstrained, kPenalized };

/// Node layout shared by every slice of a solve.
///
/// Position z stores nodes (x_i, y_j) with x_i = i dx, i = 0..nx and
/// y_j = c(-z) + j dy, j = j_lo..j_hi(z). dy is common to all positions and
/// dx = m dy for an integer shear m, so the characteristic y - z x is
/// constant along the node sequence (i, j0 + z m i).
class GridGeometry {
 public:
  GridGeometry(const ProblemSpec& spec, const GridConfig& grid, SolveKind kind);

  int nx() const noexcept { return nx_; }
  int nt() const noexcept { return nt_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  double dt() const noexcept { return dt_; }
  int shear() const noexcept { return shear_; }
  SolveKind kind() const noexcept { return kind_; }
  const PositionSet& positions() const noexcept { return positions_; }

  int j_lo() const noexcept { return j_lo_; }
  int j_hi(int z) const { return j_hi_[static_cast<std::size_t>(positions_.index(z))]; }
  int rows(int z) const { return j_hi(z) - j_lo_ + 1; }
  std::size_t nodes(int z) const {
    return static_cast<std::size_t>(nx_ + 1) * static_cast<std::size_t>(rows(z));
  }
  double floor(int z) const { return floors_[static_cast<std::size_t>(positions_.index(z))]; }

  double x(int i) const noexcept { return i * dx_; }
  double y(int z, int j) const { return floor(z) + j * dy_; }
  double t(int n) const noexcept { return n * dt_; }
  double y_top(int z) const { return y(z, j_hi(z)); }

  /// Storage offset of node (i, j) for position z.
  std::size_t offset(int z, int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(rows(z)) +
           static_cast<std::size_t>(j - j_lo_);
  }

  /// Nodes pinned to 0: the floor row for the constrained solve.
  bool dirichlet(int j) const noexcept { return kind_ == SolveKind::kConstrained && j <= 0; }

 private:
  PositionSet positions_;
  SolveKind kind_;
  int nx_;
  int nt_;
  double dx_;
  double dy_;
  double dt_;
  int shear_;
  int j_lo_;
  std::vector<int> j_hi_;
  std::vector<double> floors_;
};

}  // namespace switchgrid
