#pragma once

#include <stdexcept>
#include <string>

namespace driftscope {

// Base of every error raised by the library. The subclasses map onto the CLI
// exit codes (config 2, data 3, solver 4, anything else 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (t <= 0, theta <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class OutOfBoundsError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

// Call inside a catch block: rethrows the active exception as the same error class with
// "tag: " prefixed to its message. Non-library exceptions become Error.
[[noreturn]] void rethrow_tagged(const std::string& tag);

}  // namespace driftscope
