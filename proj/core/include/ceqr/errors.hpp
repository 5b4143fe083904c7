#pragma once

#include <stdexcept>
#include <string>

namespace ceqr {

/// Invalid configuration value or incompatible network/environment setup.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor or span extents that do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An operation called in the wrong order (e.g. backward before forward).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite network outputs reached action selection.
class DecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Optimization diverged or was handed unusable gradients.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replay sampling requested before the warm-up threshold was reached.
class BufferNotReady : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ceqr
