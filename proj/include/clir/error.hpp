#pragma once

#include <stdexcept>
#include <string>

namespace clir {

// Base class for all errors raised by the library. The CLI maps these to
// exit code 1; usage errors are handled by the argument parser itself.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File could not be opened or read/written.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed input line; message names the file and 1-based line number.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// An id referenced by one file is missing from another; message names the id.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& msg) : Error(msg) {}
};

// Bad configuration key or value; message names the key (and line if known).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A component violated a documented contract (e.g. a sentence scorer
// returned a value outside [0,1]).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& msg) : Error(msg) {}
};

}  // namespace clir
