#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace kolmo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad arguments or preconditions violated by the caller.
class UsageError : public Error {
public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

/// Invalid problem/run configuration (missing jacobians, bad config file, ...).
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

/// A trajectory left the representable range; carries the offending step.
class SimulationError : public Error {
public:
  SimulationError(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
  std::size_t step_index;
};

/// Diffusion matrix numerically singular at an evaluation point.
class EllipticityError : public Error {
public:
  explicit EllipticityError(const std::string& what) : Error(what) {}
};

/// Predicted nested-simulation cost exceeds the configured budget.
class BudgetError : public Error {
public:
  BudgetError(const std::string& what, std::uint64_t predicted, std::uint64_t budget)
      : Error(what + ": predicted " + std::to_string(predicted) + " paths, budget " +
              std::to_string(budget)),
        predicted_paths(predicted), budget_paths(budget) {}
  std::uint64_t predicted_paths;
  std::uint64_t budget_paths;
};

}  // namespace kolmo
