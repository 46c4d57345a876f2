#pragma once

#include <stdexcept>
#include <string>

namespace ksr {

// Failure categories map onto CLI exit codes: config -> 1, data -> 2,
// invariant -> 3.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace ksr
