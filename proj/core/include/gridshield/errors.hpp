#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridshield {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed case-file or measurement text. Carries the 1-based line number
/// (0 when the error is not tied to a line).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The network or a derived matrix violates a structural requirement
/// (disconnected graph, multiple slack buses, rank deficiency, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A candidate column set is numerically rank deficient.
class DegenerateSupportError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied configuration (thresholds, experiment specs, CLI).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridshield
