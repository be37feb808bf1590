#pragma once

#include <stdexcept>
#include <string>

namespace omd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands of different lengths were combined.
class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs)
      : Error("dimension mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The requested evaluation is not available for this combination of inputs.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// A theorem-tagged experiment was configured outside the step-size regime it needs.
class RegimeViolation : public Error {
 public:
  using Error::Error;
};

/// Every Monte Carlo run diverged.
class AllRunsDiverged : public Error {
 public:
  using Error::Error;
};

/// Malformed or schema-violating experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace omd
