#pragma once

#include <stdexcept>
#include <string>

namespace switchgrid {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration. `key()` is the dotted path of
/// the offending entry, e.g. "positions.c2".
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// A requested switch is not in the admissible set.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Location of the node that failed to settle in the intervention iteration.
struct NodeWitness {
  int time_index = 0;
  int z = 0;
  int i = 0;
  int j = 0;
  double x = 0.0;
  double y = 0.0;
  double change = 0.0;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& message, NodeWitness worst)
      : Error(message), worst_(worst) {}

  const NodeWitness& worst() const noexcept { return worst_; }

 private:
  NodeWitness worst_;
};

}  // namespace switchgrid
