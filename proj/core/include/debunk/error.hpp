#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace debunk {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data. Carries the offending file and
/// 1-based line number when the problem is tied to a location.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(message) {}
  DataError(const std::string& file, std::size_t line, const std::string& message)
      : Error(file + ":" + std::to_string(line) + ": " + message), file_(file), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Perplexity requested from a scorer that has not been grounded.
class NotGroundedError : public Error {
 public:
  NotGroundedError() : Error("scorer not grounded") {}
};

/// The external scorer could not be reached or reported a failure.
class BridgeError : public Error {
 public:
  using Error::Error;
};

}  // namespace debunk
