#pragma once

#include <stdexcept>
#include <string>

namespace treesample {

/// Malformed arguments, out-of-range values or structurally invalid graphs.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation would exceed a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

/// Sampling hit a step where every action has zero probability.
class ZeroMassError : public std::runtime_error {
 public:
  explicit ZeroMassError(const std::string& what) : std::runtime_error(what) {}
};

/// The budget cannot pay for a single unit of work of the requested method.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// A random instance generator gave up after its rejection cap.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace treesample
