#pragma once

#include <stdexcept>
#include <string>

namespace openq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Gamma-ratio factor, a denominator or a K-matrix entry vanished at the
// requested parameter point.
class PoleError : public Error {
 public:
  using Error::Error;
};

// An oscillator trace or an infinite sum failed its tail test.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied configuration (bad sizes, degenerate parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace openq
