#pragma once

#include <stdexcept>
#include <string>

namespace bwe {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to a numeric routine (bad cutoff, even tap count, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (WAV, feature track, checkpoint).
class FormatError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing files, mismatched corpora, wrong sample rates.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered during training or in a layer boundary check.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bwe
