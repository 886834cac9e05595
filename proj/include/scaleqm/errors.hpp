#pragma once

#include <stdexcept>
#include <string>

namespace scaleqm {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible dimensions, or an input of the wrong dimension.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Mathematically undefined operation (fractional power of a negative
/// magnitude, nonpositive mass, x outside every piecewise guard, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Unknown symbol, constant, parameter or coupling.
class LookupError : public Error {
public:
  using Error::Error;
};

/// Syntax error in DSL or configuration text; carries a 1-based position.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_;
  int column_;
};

/// No exponent vector maps the parameters onto the requested dimension.
class ScaleUnderdetermined : public Error {
public:
  using Error::Error;
};

/// Scaling rule cannot be applied to the potential family.
class RuleMismatch : public Error {
public:
  using Error::Error;
};

/// Internal invariant violated (e.g. a dimensional parameter survived scaling).
class ConsistencyError : public Error {
public:
  using Error::Error;
};

/// Requested bound state does not exist.
class NoSuchState : public Error {
public:
  using Error::Error;
};

/// Scattering energy has no propagating incident wave.
class NoScattering : public Error {
public:
  using Error::Error;
};

/// Iterative numerics failed to converge.
class NonConvergence : public Error {
public:
  using Error::Error;
};

/// Bad command-line or configuration input (missing key, unreadable file).
class UsageError : public Error {
public:
  using Error::Error;
};

/// Requested perturbation order exceeds what the exact computation supports.
class ExactnessCapError : public Error {
public:
  using Error::Error;
};

}  // namespace scaleqm
