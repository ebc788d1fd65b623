#pragma once

#include <stdexcept>
#include <string>

namespace csnt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, configuration keys or model choices.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (snapshots, fields on mismatched grids).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce an admissible result.
class SolverError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public SolverError {
 public:
  using SolverError::SolverError;
};

class CflViolation : public SolverError {
 public:
  using SolverError::SolverError;
};

class NegativeDensity : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace csnt
