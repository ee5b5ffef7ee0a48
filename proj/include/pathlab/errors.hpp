#pragma once

#include <stdexcept>
#include <string>

namespace pathlab {

/// Input outside an operation's precondition (bad grid, negative density, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A ratio whose denominator is zero, e.g. conditioning on an impossible point.
class DivisionByZero : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exhaustive enumeration would exceed the caller's path budget.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace pathlab
