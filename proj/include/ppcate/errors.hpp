#pragma once

#include <stdexcept>
#include <string>

namespace ppcate {

// Bad input: malformed CSV, invariant violations, incompatible shapes.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure without a usable fallback. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ppcate
