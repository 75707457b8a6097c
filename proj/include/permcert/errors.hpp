#pragma once

#include <stdexcept>
#include <string>

namespace permcert {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape mismatch: non-square input, unequal dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input outside an operation's domain (non-Hermitian, not PSD, r < 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Problem size above an enforced cap (exact permanent, Kronecker checks).
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Malformed matrix JSON or instance description.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Iterative routine failed numerically (non-convergence, vanishing forms).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace permcert
