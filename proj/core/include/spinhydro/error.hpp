#pragma once

#include <stdexcept>
#include <string>

namespace spinhydro {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Probability density reached the periodic boundary strip during evolution.
class SupportLeakError : public Error {
 public:
  using Error::Error;
};

/// A trajectory stayed inside the nodal region longer than the hold budget.
class NodalTrapError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input file (frame container, sidecar, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace spinhydro
