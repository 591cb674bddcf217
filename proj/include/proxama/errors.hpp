#pragma once

#include <stdexcept>
#include <string>

namespace proxama {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or operator sizes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A function argument is outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Solver or experiment configuration violates a hard constraint.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The problem does not provide the hooks a requested step needs.
class UnsupportedProblemError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value showed up during iteration.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long iteration = -1)
      : Error(iteration >= 0 ? what + " (iteration " + std::to_string(iteration) + ")" : what),
        iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

/// Kernel matrix too close to singular for the strong-convexity argument.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

/// Test instance whose optimality system cannot be solved.
class DegenerateInstanceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Input data is readable but semantically invalid (e.g. labels not +-1).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace proxama
