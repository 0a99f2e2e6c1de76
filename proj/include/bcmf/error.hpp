#pragma once

#include <stdexcept>
#include <string>

namespace bcmf {

// Base for all library errors. The CLI maps the subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, invalid columns, positivity violations.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or argument combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Violated precondition inside the numerical core.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace bcmf
