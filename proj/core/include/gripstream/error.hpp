#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gripstream {

// Base of every error thrown by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain of a conversion (negative resistance, voltage
// at or above supply, force beyond the calibrated range).
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Frame fields violate the wire invariants on the encode side.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. Carries the file and 1-based line when known.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// A recorded session is missing a file or has non-monotone timestamps.
class StructureError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure during a multi-file write. completed() lists the files
// that were fully written before the failure.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::vector<std::string> completed = {})
      : Error(what), completed_(std::move(completed)) {}

  const std::vector<std::string>& completed() const noexcept { return completed_; }

 private:
  std::vector<std::string> completed_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// A statistic that has no value for the given data (0/0 F ratio, shares of an
// all-zero subset, ratio with zero denominator).
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

class UnsupportedDesignError : public Error {
 public:
  using Error::Error;
};

class SequencingError : public Error {
 public:
  using Error::Error;
};

}  // namespace gripstream
