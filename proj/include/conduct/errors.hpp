#pragma once

#include <stdexcept>
#include <string>

namespace conduct {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parameter values outside the region where the model is defined.
struct DomainError : Error {
  using Error::Error;
};

// alpha0 == beta0: the log equilibrium system has no unique solution.
struct SingularModelError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

struct DegenerateError : Error {
  using Error::Error;
};

struct RankDeficientError : Error {
  using Error::Error;
};

struct InsufficientDataError : Error {
  using Error::Error;
};

struct EmptyInputError : Error {
  using Error::Error;
};

// Malformed configuration or dataset input. The message carries the location.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace conduct
