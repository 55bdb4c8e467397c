#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace landlab {

/// Invalid configuration or out-of-contract arguments (bad limits, class counts, sizes).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed text or binary input. Carries the location that failed to parse.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) +
                           ": " + what),
        source_(std::move(source)),
        line_(line),
        column_(column) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  /// For binary formats this holds the byte offset.
  std::size_t column() const noexcept { return column_; }

 private:
  std::string source_;
  std::size_t line_;
  std::size_t column_;
};

/// A mutation operator could not find any legal move.
class OperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A landscape measure is undefined for the given series (zero variance, bad step).
class MeasureError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Filesystem failure, always with the offending path in the message.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace landlab
