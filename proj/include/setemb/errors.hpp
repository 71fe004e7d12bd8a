#pragma once

#include <stdexcept>
#include <string>

namespace setemb {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: invalid arguments, malformed configuration, misuse of an API.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent data: bad files, unknown names, invariant violations in input.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Query text that does not parse or does not resolve against a catalog.
class QueryError : public DataError {
 public:
  using DataError::DataError;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace setemb
