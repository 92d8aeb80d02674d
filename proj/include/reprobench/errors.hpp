#pragma once

#include <stdexcept>
#include <string>

namespace reprobench {

/// Raised when caller-supplied input violates a precondition or invariant.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised for failures that are not the caller's fault (I/O, transport).
/// The CLI maps this to exit code 1.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace reprobench
