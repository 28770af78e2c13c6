#pragma once

#include <stdexcept>
#include <string>

namespace xnocs {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad inputs: missing files, malformed streams, precondition violations.
// The CLI maps these to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

// Numerical failures: degenerate configurations, ill-conditioned solves.
// The CLI maps these to exit code 2.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace xnocs
