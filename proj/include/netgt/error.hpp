#pragma once

#include <stdexcept>
#include <string>

namespace netgt {

// Base for every error raised by the library. CLI maps all of these to exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model parameters, dimension mismatches, malformed matrices.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// The statistic is undefined for this few nodes.
class InstanceTooSmall : public Error {
 public:
  using Error::Error;
};

// Exhaustive oracles refuse inputs above their size guard.
class GuardError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Degenerate model (zero matrix, all-{0,1} probabilities, alpha0 == 0).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace netgt
