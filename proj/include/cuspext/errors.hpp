#pragma once

#include <stdexcept>
#include <string>

namespace cuspext {

enum class RegionLabel;

/// Invalid parameters or malformed input (dimension, degree, non-finite coordinates).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponent outside the admissible window of a formula.
class WindowError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Point outside the domain of a chart (or outside its image, for inverses).
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, RegionLabel label)
      : std::domain_error(what), label_(label) {}
  RegionLabel label() const noexcept { return label_; }

 private:
  RegionLabel label_;
};

/// Input too close to a piece interface for a differential to be taken.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Jacobian determinant numerically zero.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A shell that does not meet the requested region.
class EmptyRegionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace cuspext
