#pragma once

#include <stdexcept>
#include <string>

namespace webster {

/// Base class for every error raised by the toolkit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Courant number above 1: the explicit scheme would diverge.
struct StabilityError : Error {
  using Error::Error;
};

/// Argument outside the domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

/// Field magnitude exceeded the blowup guard during time stepping.
struct NumericalBlowup : Error {
  using Error::Error;
};

struct SilenceError : Error {
  using Error::Error;
};

/// Not enough qualifying LPC resonances.
struct EstimationError : Error {
  using Error::Error;
};

/// No frame passed the voicing threshold.
struct UnvoicedError : Error {
  using Error::Error;
};

struct SampleRateError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace webster
