#pragma once

#include <stdexcept>
#include <string>

namespace spinn {

/// Invalid configuration, shape mismatch, or precondition violation.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A quantity that should have a closed-form reference does not have one.
struct NoReferenceError : std::runtime_error {
  explicit NoReferenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite value detected during evaluation or training.
struct NonFiniteError : std::runtime_error {
  explicit NonFiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

}  // namespace spinn
