#pragma once

#include <span>
#include <vector>

namespace casimir::numeric {

/// Piecewise-cubic Hermite interpolant with Fritsch-Carlson style slopes
/// (the PCHIP scheme): monotone data give a monotone interpolant.
/// Queries outside [front, back] throw BoundsError.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::span<const double> x, std::span<const double> y);

  double value(double x) const;
  double derivative(double x) const;

  double x_min() const { return x_.front(); }
  double x_max() const { return x_.back(); }
  bool contains(double x) const { return !x_.empty() && x >= x_.front() && x <= x_.back(); }
  bool empty() const { return x_.empty(); }

  const std::vector<double>& knots() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::size_t locate(double x) const;

  std::vector<double> x_, y_, slope_;
};

}  // namespace casimir::numeric
