#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace switchgrid {

/// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value();
}

/// Sample mean and standard error of the mean, both summed in index order.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_and_se(std::span<const double> values) {
  MeanSe out;
  const std::size_t n = values.size();
  if (n == 0) return out;
  out.mean = compensated_sum(values) / static_cast<double>(n);
  if (n < 2) return out;
  CompensatedSum sq;
  for (double v : values) sq.add((v - out.mean) * (v - out.mean));
  out.se = std::sqrt(sq.value() / static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

}  // namespace switchgrid
