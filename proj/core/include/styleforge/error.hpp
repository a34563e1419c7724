#pragma once

#include <stdexcept>
#include <string>

namespace styleforge {

// Root of every exception the library throws. Callers that only care about
// "the library rejected this" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A documented precondition on an argument value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem or codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace styleforge
