#pragma once

#include <stdexcept>
#include <string>

namespace fcmpc {

// Error taxonomy. Each class maps to one CLI exit code / C API status,
// see include/fcmpc.h.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite parameter or state handed to the plant.
struct InvalidStateError : std::runtime_error {
  explicit InvalidStateError(const std::string& msg) : std::runtime_error(msg) {}
};

// Integrator produced a non-finite value; message names the field.
struct IntegrationError : std::runtime_error {
  explicit IntegrationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Stack current at or above the limiting current.
struct LimitCurrentError : std::runtime_error {
  explicit LimitCurrentError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingDivergedError : std::runtime_error {
  explicit TrainingDivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SimulationError : std::runtime_error {
  explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fcmpc
