#pragma once

#include <stdexcept>
#include <string>

namespace mmv {

// Base of every error raised by the library. Callers that only need to
// distinguish "bad input" from "bad file" catch ConfigError / FormatError.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-conformable shapes. The message names the offending operation.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& op, const std::string& detail)
      : Error(op + ": dimension mismatch (" + detail + ")") {}
};

// Out-of-range parameter (G < N_BS, K_c > K, theta1 <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. backprop from a non-scalar node.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Input that makes a quantity undefined (zero-energy channel, zero signal).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training.
class TrainingError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmv
