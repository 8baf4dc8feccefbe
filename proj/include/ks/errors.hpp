#pragma once

#include <stdexcept>
#include <string>

namespace ks {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParameterError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

// ODE step-size underflow or step budget exhausted; carries the last good radius.
struct IntegrationError : Error {
  double last_radius;
  IntegrationError(const std::string& what, double r) : Error(what), last_radius(r) {}
};

// A shooting trajectory left the admissible basin before reaching its target radius.
struct ShootError : Error {
  double failure_radius;
  ShootError(const std::string& what, double r) : Error(what), failure_radius(r) {}
};

struct FitError : Error {
  using Error::Error;
};

struct DegenerateSignalError : Error {
  using Error::Error;
};

struct ConvergenceError : Error {
  using Error::Error;
};

struct PrecisionError : Error {
  using Error::Error;
};

struct PoleError : Error {
  using Error::Error;
};

}  // namespace ks
