#pragma once

#include <stdexcept>
#include <string>

namespace kgr {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file does not match its schema (bad header, bad field, bad line).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Arguments or data violate an operation's precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Training diverged (non-finite loss or parameters).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgr
