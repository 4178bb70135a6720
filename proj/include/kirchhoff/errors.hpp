#pragma once

#include <stdexcept>
#include <string>

namespace kirchhoff {

/// Raised when an argument lies outside the mathematical domain of an
/// operation (d < 4, x < 0, a regime precondition that does not hold, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input: bad grid sizes, mismatched grids, invalid configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to produce a result it is contractually
/// required to produce (e.g. no admissible field found).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kirchhoff
