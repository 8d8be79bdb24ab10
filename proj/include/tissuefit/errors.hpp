#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tissuefit {

/// Bad input value: out-of-range parameter, unknown set name, malformed request.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation reached a state it cannot proceed from (det F <= 0, inverted volume).
class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text input rejected; carries the 1-based line number (0 when not line-specific).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line),
        detail_(what) {}

  std::size_t line() const noexcept { return line_; }
  /// Message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class ElementInversion : public InvalidState {
 public:
  ElementInversion(std::size_t element, double time, double det)
      : InvalidState("element " + std::to_string(element) + " inverted at t = " +
                     std::to_string(time) + " s (det F = " + std::to_string(det) + ")"),
        element_(element),
        time_(time) {}

  std::size_t element() const noexcept { return element_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t element_;
  double time_;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(double time, const std::string& what)
      : std::runtime_error("diverged at t = " + std::to_string(time) + " s: " + what), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

class NonConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tissuefit
