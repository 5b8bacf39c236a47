#pragma once

#include <stdexcept>
#include <string>

namespace bliphasu {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Zero-norm references, empty measurement energy and similar inputs that make
// a quantity undefined.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Leading eigenvector requested of a matrix with no usable spectrum.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Structurally valid file whose contents violate dimension invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bliphasu
