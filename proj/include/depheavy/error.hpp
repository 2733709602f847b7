#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace depheavy {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A package or edge that the caller named does not exist.
class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& what, std::string package = {})
      : Error(what), package_(std::move(package)) {}

  const std::string& package() const noexcept { return package_; }

 private:
  std::string package_;
};

/// Arguments exist but violate an operation's precondition.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  /// 1-based; 0 when not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace depheavy
