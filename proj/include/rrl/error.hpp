#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rrl {

/// Root of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class dimension_mismatch : public error {
 public:
  dimension_mismatch(std::size_t expected, std::size_t got)
      : error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(got)) {}
};

/// Argument outside the documented domain of an operation.
class domain_error : public error {
 public:
  using error::error;
};

class not_realizable : public error {
 public:
  using error::error;
};

/// Unsupported class / model / distribution combination.
class unsupported : public error {
 public:
  using error::error;
};

class solver_failure : public error {
 public:
  using error::error;
};

/// A runtime self-check found an internal contradiction.
class invariant_violation : public error {
 public:
  using error::error;
};

class parse_error : public error {
 public:
  parse_error(std::size_t line, const std::string& what)
      : error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rrl
