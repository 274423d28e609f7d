#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ccm {

/// Piecewise-linear function y(x) defined by strictly increasing knots.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::string name, std::vector<std::pair<double, double>> knots);

  /// Throws DomainError (named after the table) outside [x_min, x_max].
  double operator()(double x) const;

  double x_min() const { return xs_.front(); }
  double x_max() const { return xs_.back(); }
  bool contains(double x) const { return x >= x_min() && x <= x_max(); }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }
  const std::string& name() const { return name_; }
  bool empty() const { return xs_.empty(); }

 private:
  std::string name_;
  std::vector<double> xs_;
  std::vector<double> ys_;
};

}  // namespace ccm
