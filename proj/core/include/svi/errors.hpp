#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace svi {

// Caller violated a documented precondition (bad argument ranges, etc).
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Incompatible block layouts or mismatched grids.
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Invalid experiment configuration (CLI maps this to exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite iterate during a run (CLI maps this to exit code 3).
struct DivergenceError : std::runtime_error {
  DivergenceError(std::int64_t k, const std::string& what)
      : std::runtime_error(what), iteration(k) {}
  std::int64_t iteration;
};

// Iterative subroutine hit its cap before reaching tolerance.
struct ConvergenceError : std::runtime_error {
  ConvergenceError(double res, const std::string& what)
      : std::runtime_error(what), residual(res) {}
  double residual;
};

}  // namespace svi
