#pragma once

#include <stdexcept>
#include <string>

namespace msi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed header, CSV, JSON or other on-disk content.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Grids whose dimensions disagree, or a data file whose size does not
/// match its header.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A spectral role that is required but absent, duplicated, or unknown.
class RoleError : public Error {
public:
  using Error::Error;
};

/// Image-level context (M_RED, component ranges, UPDM or MuWi
/// coefficients) that an index needs but was not supplied.
class ContextError : public Error {
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation: zero
/// denominators, degenerate variance, empty inputs.
class DomainError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace msi
