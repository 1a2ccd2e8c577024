#pragma once

#include <stdexcept>
#include <string>

namespace degentaxis {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller (bad sizes, negative extents, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Exponent or parameter outside the admissible window of a result.
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// A functional is not defined on the given state (e.g. ln u with u = 0).
class UndefinedFunctional : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or uncontrolled clipping during time stepping.
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// Negative density under the `reject` clip policy.
class PositivityError : public Error {
 public:
  using Error::Error;
};

}  // namespace degentaxis
