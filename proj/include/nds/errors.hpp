#pragma once

#include <stdexcept>
#include <string>

namespace nds {

// Root of every failure raised by the library. The CLI maps ParseError and
// UsageError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ParseError {
 public:
  using ParseError::ParseError;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class RankAmbiguityError : public Error {
 public:
  using Error::Error;
};

class ContourError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

class DomainViolationError : public Error {
 public:
  using Error::Error;
};

class ZeroInSpectrumError : public Error {
 public:
  using Error::Error;
};

class NotAnEigenvalueError : public Error {
 public:
  using Error::Error;
};

class MultipleKernelError : public Error {
 public:
  using Error::Error;
};

class SingularImplicitError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace nds
