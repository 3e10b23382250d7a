#pragma once

#include <stdexcept>
#include <string>

namespace hapod {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed data: non-finite entries, dimension or space mismatches.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values (tolerances, tree shapes, counts).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Misuse of a stateful incremental session.
class SessionError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel failed or produced non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File-level failures; the message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hapod
