#pragma once

#include <stdexcept>
#include <string>

namespace healnet {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A declaration or mutation would break a model invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// An id does not resolve in the current model.
class UnknownIdError : public Error {
 public:
  using Error::Error;
};

/// Not enough spare cpu/mem (or no eligible host) for an orchestration action.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Scenario text failed to parse or validate. Carries the 1-based line number
/// (0 when the problem is not tied to a single line).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace healnet
