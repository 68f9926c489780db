#pragma once

#include <stdexcept>
#include <string>

namespace ncbc {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters (weights, rates, clique or phantom settings).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Fields that should share a lattice do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Input data violates a precondition (non-finite, negative, too small).
class DataError : public Error {
 public:
  using Error::Error;
};

// A quantity is undefined for the given input (zero variance, zero mean, ...).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. Carries the byte offset where parsing stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  explicit FormatError(const std::string& what) : Error(what), offset_(0) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Document is well-formed but fails schema or semantic validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ncbc
