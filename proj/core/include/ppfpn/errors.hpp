#pragma once

#include <stdexcept>
#include <string>

namespace ppfpn {

// Exit-code contract for the command line driver:
//   2 = configuration error, 3 = solver failure, 4 = invariant violation.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolverFailure : std::runtime_error {
  explicit SolverFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvariantViolation : std::runtime_error {
  explicit InvariantViolation(const std::string& msg) : std::runtime_error(msg) {}
};

}
