#pragma once

#include <stdexcept>
#include <string>

namespace resdet {

/// Raised when a model violates a stability or solvability requirement
/// (unstable closed loop, unstable estimator, Riccati/Lyapunov divergence,
/// singular steady-state map).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed scenario documents or inconsistent dimensions.
class ScenarioError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace resdet
