#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obbtrack {

// Base of everything the library throws on bad data or bad state.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class StreamOrderError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

// Raised when a tracker invariant is found broken. Indicates a bug, not bad input.
class InternalStateError : public Error {
 public:
  using Error::Error;
};

// Line-oriented parse failure. line() is 1-based; 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : Error(format(line, field, what)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field, const std::string& what) {
    std::string msg = "line " + std::to_string(line);
    if (!field.empty()) msg += ", field '" + field + "'";
    return msg + ": " + what;
  }

  std::size_t line_;
  std::string field_;
};

}  // namespace obbtrack
