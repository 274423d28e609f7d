#pragma once

#include <stdexcept>
#include <string>

namespace ccm {

/// Invalid or inconsistent configuration / input data.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A material property was requested outside its tabulated range.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& property, double t, double lo, double hi);
  const std::string& property() const noexcept { return property_; }

 private:
  std::string property_;
};

/// Non-finite values or a failed iterative solve.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Explicit time step exceeds the admissible bound.
class StabilityError : public NumericError {
 public:
  StabilityError(const std::string& region, double dt, double dt_max);
  double admissible_dt() const noexcept { return dt_max_; }

 private:
  double dt_max_;
};

/// Measurement data carries no information for a fit (zero denominators,
/// empty sample sets).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccm
