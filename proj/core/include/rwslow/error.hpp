#pragma once

#include <stdexcept>
#include <string>

namespace rwslow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Memory/element budget would be exceeded (ball too large, support too large).
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Malformed descriptor token or config file.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Group, family or regime not in the supported catalog.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Quadrature or bisection failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Not enough data (or data too uncertain) for a fit.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace rwslow
