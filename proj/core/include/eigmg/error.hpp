#pragma once

#include <stdexcept>
#include <string>

namespace eigmg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed mesh or config text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

private:
  int line_ = 0;
};

/// A domain-type invariant does not hold (mesh topology, SPD coefficient, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// A configured size budget would be exceeded.
class ResourceError : public Error {
public:
  using Error::Error;
};

/// Factorization failure, indefinite solve that could not be recovered, breakdown.
class NumericalError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace eigmg
