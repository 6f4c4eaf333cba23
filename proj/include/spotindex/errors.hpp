#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spotindex {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. Carries the source line and field when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& field, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": field '" + field + "': " + what),
        line_(line),
        field_(field) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Query outside the time range covered by a trace or series.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Index undefined at an instant (every member capped or uncovered).
class GapError : public Error {
 public:
  using Error::Error;
};

class PolicyError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace spotindex
