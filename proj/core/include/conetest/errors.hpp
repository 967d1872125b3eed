#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace conetest {

/// Broad category of a failure; the CLI maps categories to exit codes.
enum class ErrorCategory {
  input,        // malformed or insufficient data
  numeric,      // conditioning, solver or quadrature failures
  calibration,  // unreachable level, incompatible calibration mode
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what)
      : Error(ErrorCategory::input, what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ErrorCategory::input, what) {}
};

/// A block that had to be inverted was singular (or beyond the condition cap).
/// Carries the bitmask of the offending index set.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, std::uint32_t subset_mask)
      : Error(ErrorCategory::numeric, what), subset_mask_(subset_mask) {}

  std::uint32_t subset_mask() const noexcept { return subset_mask_; }

 private:
  std::uint32_t subset_mask_;
};

/// No subset, or more than one, satisfied the active-subset condition.
class DegenerateBoundaryError : public Error {
 public:
  DegenerateBoundaryError(const std::string& what, int qualifying)
      : Error(ErrorCategory::numeric, what), qualifying_(qualifying) {}

  int qualifying_count() const noexcept { return qualifying_; }

 private:
  int qualifying_;
};

class MetricError : public Error {
 public:
  explicit MetricError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, int iterations, double max_violation)
      : Error(ErrorCategory::numeric, what),
        iterations_(iterations),
        max_violation_(max_violation) {}

  int iterations() const noexcept { return iterations_; }
  double max_violation() const noexcept { return max_violation_; }

 private:
  int iterations_;
  double max_violation_;
};

class ReductionError : public Error {
 public:
  explicit ReductionError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double error_estimate)
      : Error(ErrorCategory::numeric, what), error_estimate_(error_estimate) {}

  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

class DegenerateVarianceError : public Error {
 public:
  DegenerateVarianceError(const std::string& what, int coordinate)
      : Error(ErrorCategory::numeric, what), coordinate_(coordinate) {}

  int coordinate() const noexcept { return coordinate_; }

 private:
  int coordinate_;
};

class UndefinedDirectionError : public Error {
 public:
  explicit UndefinedDirectionError(const std::string& what)
      : Error(ErrorCategory::numeric, what) {}
};

class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what)
      : Error(ErrorCategory::calibration, what) {}
};

class UnsupportedCalibrationError : public Error {
 public:
  explicit UnsupportedCalibrationError(const std::string& what)
      : Error(ErrorCategory::calibration, what) {}
};

}  // namespace conetest
