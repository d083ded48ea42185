#pragma once

#include <stdexcept>
#include <string>

namespace quesim {

// Malformed inputs: bad CSV, bad GloVe lines, inconsistent schemas.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values during training/evaluation.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration supplied by the caller.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace quesim
