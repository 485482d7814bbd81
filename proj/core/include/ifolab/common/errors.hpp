#pragma once

#include <stdexcept>
#include <string>

namespace ifolab {

// Error taxonomy shared by the whole library. The CLI maps these onto exit
// codes: usage 1, config/data 2, numeric 3.

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent wiring: dimension chains, degenerate baselines, bad flags.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unusable input data (files, datasets, distributions).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values or other numerical breakdown at runtime.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ifolab
