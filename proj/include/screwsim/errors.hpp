#pragma once

#include <stdexcept>
#include <string>

namespace screwsim {

// Malformed input files, schema violations, and inconsistent run parameters.
// CLI maps this to exit code 2.
struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

// Failures during integration (non-finite states or controls). Exit code 1.
struct SimulationError : std::runtime_error {
  explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace screwsim
