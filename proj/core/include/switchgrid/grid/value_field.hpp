#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "switchgrid/grid/grid.hpp"

namespace switchgrid {

/// Values of every position at one time.
class FieldSlice {
 public:
  explicit FieldSlice(std::shared_ptr<const GridGeometry> geometry);

  const GridGeometry& geometry() const noexcept { return *geometry_; }
  const std::shared_ptr<const GridGeometry>& geometry_ptr() const noexcept { return geometry_; }

  double at(int z, int i, int j) const {
    return data_[index(z)][geometry_->offset(z, i, j)];
  }
  double& at(int z, int i, int j) { return data_[index(z)][geometry_->offset(z, i, j)]; }

  std::vector<double>& values(int z) { return data_[index(z)]; }
  const std::vector<double>& values(int z) const { return data_[index(z)]; }

  /// Value at column i and fractional row jf. Rows above the top clamp to
  /// it; rows below j_lo read 0.
  double column_value(int z, int i, double jf, Interpolation order) const;

  /// Bilinear value at (x, y), clamped to the stored window; 0 below j_lo.
  double interpolate(int z, double x, double y) const;

 private:
  std::size_t index(int z) const {
    return static_cast<std::size_t>(geometry_->positions().index(z));
  }

  std::shared_ptr<const GridGeometry> geometry_;
  std::vector<std::vector<double>> data_;
};

struct FieldMetadata {
  std::uint64_t spec_hash = 0;
  std::uint64_t grid_hash = 0;
  SolveKind kind = SolveKind::kConstrained;
  double epsilon = 0.0;  ///< penalized solves only
};

/// Time-indexed slices n = 0..nt of one solve.
class ValueField {
 public:
  ValueField(std::shared_ptr<const GridGeometry> geometry, GridConfig grid, FieldMetadata meta);

  const GridGeometry& geometry() const noexcept { return *geometry_; }
  const std::shared_ptr<const GridGeometry>& geometry_ptr() const noexcept { return geometry_; }
  const GridConfig& grid() const noexcept { return grid_; }
  const FieldMetadata& metadata() const noexcept { return meta_; }

  int nt() const noexcept { return geometry_->nt(); }
  const FieldSlice& slice(int n) const { return slices_.at(static_cast<std::size_t>(n)); }
  FieldSlice& slice(int n) { return slices_.at(static_cast<std::size_t>(n)); }

  double at(int n, int z, int i, int j) const { return slice(n).at(z, i, j); }

  /// Bilinear in (x, y), linear in t.
  double sample(double t, int z, double x, double y) const;

 private:
  std::shared_ptr<const GridGeometry> geometry_;
  GridConfig grid_;
  FieldMetadata meta_;
  std::vector<FieldSlice> slices_;
};

}  // namespace switchgrid
