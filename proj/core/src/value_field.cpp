#include "switchgrid/grid/value_field.hpp"

#include <algorithm>
#include <cmath>

namespace switchgrid {

FieldSlice::FieldSlice(std::shared_ptr<const GridGeometry> geometry) : geometry_(std::move(geometry)) {
  const auto& k = geometry_->positions();
  data_.resize(static_cast<std::size_t>(k.size()));
  for (int z = k.lowest(); z <= k.highest(); ++z) data_[index(z)].assign(geometry_->nodes(z), 0.0);
}

namespace {

// Fritsch-Butland slope on unit spacing.
double pchip_slope(double left, double right) {
  if (left * right <= 0.0) return 0.0;
  return 2.0 / (1.0 / left + 1.0 / right);
}

}  // namespace

double FieldSlice::column_value(int z, int i, double jf, Interpolation order) const {
  const GridGeometry& g = *geometry_;
  const int lo = g.j_lo();
  const int hi = g.j_hi(z);
  if (jf <= lo - 1) return 0.0;
  if (jf >= hi) return at(z, i, hi);
  const double r = std::round(jf);
  if (std::abs(jf - r) <= 1e-9 && r >= lo) return at(z, i, static_cast<int>(r));
  const int k = static_cast<int>(std::floor(jf));
  const double w = jf - k;
  auto v = [&](int j) { return j < lo ? 0.0 : at(z, i, std::min(j, hi)); };
  const double v0 = v(k);
  const double v1 = v(k + 1);
  if (order == Interpolation::kLinear || k < lo) return (1.0 - w) * v0 + w * v1;

  const double d = v1 - v0;
  const double m0 = k - 1 >= lo ? pchip_slope(v0 - v(k - 1), d) : d;
  const double m1 = k + 2 <= hi ? pchip_slope(d, v(k + 2) - v1) : d;
  const double w2 = w * w;
  const double w3 = w2 * w;
  return (2 * w3 - 3 * w2 + 1) * v0 + (w3 - 2 * w2 + w) * m0 + (-2 * w3 + 3 * w2) * v1 +
         (w3 - w2) * m1;
}

double FieldSlice::interpolate(int z, double x, double y) const {
  const GridGeometry& g = *geometry_;
  const double xf = std::clamp(x / g.dx(), 0.0, static_cast<double>(g.nx()));
  const int i0 = std::min(static_cast<int>(std::floor(xf)), g.nx() - 1);
  const double wx = xf - i0;
  const double jf = (y - g.floor(z)) / g.dy();
  const double a = column_value(z, i0, jf, Interpolation::kLinear);
  if (wx <= 0.0) return a;
  const double b = column_value(z, i0 + 1, jf, Interpolation::kLinear);
  return (1.0 - wx) * a + wx * b;
}

ValueField::ValueField(std::shared_ptr<const GridGeometry> geometry, GridConfig grid, FieldMetadata meta)
    : geometry_(std::move(geometry)), grid_(std::move(grid)), meta_(meta) {
  slices_.reserve(static_cast<std::size_t>(geometry_->nt() + 1));
  for (int n = 0; n <= geometry_->nt(); ++n) slices_.emplace_back(geometry_);
}

double ValueField::sample(double t, int z, double x, double y) const {
  const double nf = std::clamp(t / geometry_->dt(), 0.0, static_cast<double>(nt()));
  const int n0 = std::min(static_cast<int>(std::floor(nf)), nt() - 1);
  const double w = nf - n0;
  const double a = slice(n0).interpolate(z, x, y);
  if (w <= 1e-12) return a;
  return (1.0 - w) * a + w * slice(n0 + 1).interpolate(z, x, y);
}

}  // namespace switchgrid
