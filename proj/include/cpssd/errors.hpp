// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <stdexcept>
#include <string>

namespace cpssd {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid inputs: bad parameters, broken invariants, malformed configs.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

// Numerical failures at runtime (non-convergence, overflow, NaN).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

// A moment was requested that the distribution does not possess.
class UndefinedMomentError : public NumericalError {
 public:
  explicit UndefinedMomentError(const std::string& what) : NumericalError(what) {}
};

// Adaptive quadrature did not reach the requested tolerance; carries the
// best estimate obtained so far.
class QuadratureError : public NumericalError {
 public:
  QuadratureError(const std::string& what, double best_estimate, double error_estimate)
      : NumericalError(what), best_estimate_(best_estimate), error_estimate_(error_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double best_estimate_;
  double error_estimate_;
};

}  // namespace cpssd
