#pragma once

#include <stdexcept>
#include <string>

namespace cdp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad allocation vectors, inconsistent dimensions, ragged files.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Parameter outside the domain of a model or distribution.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A matrix that should be SPD was not, or a weight vector collapsed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Request refused because it would blow up combinatorially.
class TooLarge : public Error {
 public:
  using Error::Error;
};

/// Data or config file could not be parsed.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdp
