#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace asgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or construction parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Vector lengths that do not match the problem dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A step size above the admissible cap for the requested update.
class StepCapError : public Error {
 public:
  using Error::Error;
};

/// Non-finite iterate encountered; carries the step at which it appeared.
class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t step, const std::string& what)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace asgd
