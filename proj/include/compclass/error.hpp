#pragma once

#include <stdexcept>
#include <string>

namespace compclass {

/// Input violates a documented invariant (shape, symmetry, PSD-ness, ranks, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization or numerical routine could not complete.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed experiment configuration. `line()` is 0 when the problem is not
/// tied to a single line (e.g. a missing section).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace compclass
