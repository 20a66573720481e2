#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapelab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression source. `offset()` is the byte offset of the failure.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(message + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Evaluation failure: unbound name or a function applied outside its domain.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Invalid input data or configuration detected before any numerics run.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure hit a singular locus, blew up or drifted past its bound.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace shapelab
