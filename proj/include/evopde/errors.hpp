#pragma once

#include <stdexcept>
#include <string>

namespace evopde {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed inputs: shape mismatches, out-of-range indices, bad genomes.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: unstable grids, bad probabilities, unknown names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Optimizer produced a non-finite loss.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& msg, int epoch)
      : Error(msg + " (epoch " + std::to_string(epoch) + ")"), epoch(epoch) {}
  int epoch;
};

/// Time integrator produced a non-finite state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& msg, long step)
      : Error(msg + " (step " + std::to_string(step) + ")"), step(step) {}
  long step;
};

}  // namespace evopde
