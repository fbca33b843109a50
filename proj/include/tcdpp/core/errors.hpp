#pragma once

#include <stdexcept>
#include <string>

namespace tcdpp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Time not on the grid, or paths/measures living on different grids.
struct GridMismatch : Error {
  using Error::Error;
};

struct UnsupportedKind : Error {
  using Error::Error;
};

// Concatenation requested outside the compatibility set.
struct Incompatible : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

struct InvariantError : Error {
  using Error::Error;
};

struct SimulationError : Error {
  using Error::Error;
};

struct CflViolation : Error {
  CflViolation(const std::string& what, double required)
      : Error(what), required_dt(required) {}
  double required_dt;
};

struct UsageError : Error {
  using Error::Error;
};

}  // namespace tcdpp
