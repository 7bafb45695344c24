#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace atise {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line` is 1-based; `source` is filled in by callers
// that know the file name.
class ParseError : public Error {
 public:
  ParseError(std::int64_t line, const std::string& what, std::string source = {})
      : Error(format(source, line, what)), line_(line), source_(std::move(source)), detail_(what) {}

  std::int64_t line() const { return line_; }
  const std::string& source() const { return source_; }
  ParseError with_source(const std::string& source) const { return ParseError(line_, detail_, source); }

 private:
  static std::string format(const std::string& source, std::int64_t line, const std::string& what) {
    return (source.empty() ? std::string("line ") : source + ":") + std::to_string(line) + ": " + what;
  }

  std::int64_t line_;
  std::string source_;
  std::string detail_;
};

// Well-formed input that violates a semantic rule (reversed interval, unknown label, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Persisted container problems.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace atise
