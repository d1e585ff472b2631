#pragma once

#include <stdexcept>
#include <string>

namespace gibrat {

// Invalid parameters or inputs that violate a documented precondition.
// The CLI maps this to exit code 2 (configuration error).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed to reach its tolerance (quadrature did not
// converge, truncation overflowed its cap, ...).  CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A hard resource cap was hit before the tolerance (e.g. series length).
// Subtype of numerical failure: CLI exit code 3.
class ResourceError : public NumericError {
 public:
  explicit ResourceError(const std::string& what) : NumericError(what) {}
};

}  // namespace gibrat
