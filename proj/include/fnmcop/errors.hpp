#pragma once

#include <stdexcept>
#include <string>

namespace fnmcop {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure failed (non-convergence, non-finite value at a node, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: unreadable files, malformed columns, too few rows.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every start of an optimization failed.
class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fnmcop
