#pragma once

#include <stdexcept>
#include <string>

namespace bnsl {

/// Malformed or unusable input data (files, tables, datasets).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incoherent or out-of-range configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Inconsistent internal state, e.g. a broken predecessor chain.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bnsl
