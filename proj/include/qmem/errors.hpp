#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace qmem {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A model or configuration field violates its invariant. `field()` names it.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The Lyapunov operator is singular or its matrix is not Hurwitz.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// The discount horizon violates the admissibility bound.
class HorizonError : public Error {
 public:
  HorizonError(const std::string& what, double max_admissible)
      : Error(what), max_admissible_(max_admissible) {}
  /// Supremum of admissible horizons; +inf when every T > 0 is admissible.
  double max_admissible() const noexcept { return max_admissible_; }

 private:
  double max_admissible_;
};

/// The fidelity level is not regular, so derivatives of tau are undefined.
class RegularityError : public Error {
 public:
  using Error::Error;
};

/// The reference scale Delta_* (or Gamma_*) vanishes.
class DegenerateScaleError : public Error {
 public:
  using Error::Error;
};

/// An iterative numerical procedure failed to converge or lost accuracy.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmem
