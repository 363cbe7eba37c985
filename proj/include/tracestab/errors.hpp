#pragma once

#include <stdexcept>
#include <string>

namespace tracestab {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative or adaptive method failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A certificate could not be produced with the given budget (e.g. K too small).
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two independent routes disagree beyond tolerance.
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Operation intentionally not provided for this input class.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tracestab
