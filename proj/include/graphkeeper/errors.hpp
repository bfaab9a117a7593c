#pragma once

#include <stdexcept>
#include <string>

namespace gk {

// Base of every error raised by the library. The CLI maps subclasses onto
// process exit codes (see exit_code()).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument values or inconsistent shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Index or size outside the admissible range.
class BoundsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Factorization failures, undefined quantities (e.g. cosine of a zero row).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing dataset / checkpoint files.
class DataError : public Error {
 public:
  using Error::Error;
};

// Bad configuration document or CLI arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. consuming a forward tape twice.
class ContractError : public Error {
 public:
  using Error::Error;
};

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const ValidationError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 1;
}

}  // namespace gk
