#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace entlink {

// Bad argument or configuration value. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed scenario or spec text. `line` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// No plan satisfies the constraints; `binding` names the constraint.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::string binding)
      : std::runtime_error(what), binding_(std::move(binding)) {}
  const std::string& binding() const noexcept { return binding_; }

 private:
  std::string binding_;
};

// A control loop or numerical routine blew up.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tracking lost the beacon for too large a fraction of the run.
class LockLostError : public std::runtime_error {
 public:
  LockLostError(const std::string& what, double locked_fraction)
      : std::runtime_error(what), locked_fraction_(locked_fraction) {}
  double locked_fraction() const noexcept { return locked_fraction_; }

 private:
  double locked_fraction_;
};

}  // namespace entlink
