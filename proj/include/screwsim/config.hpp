#pragma once

#include <screwsim/engine.hpp>

#include <string>

namespace screwsim {

// Parses a simulation config from JSON text. A relative schedule path is
// resolved against base_dir. Unknown keys are rejected so typos surface
// instead of silently falling back to defaults. Throws SchemaError.
SimConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");

// Reads and parses the file at path; the schedule path resolves against the
// config file's directory.
SimConfig load_config(const std::string& path);

}  // namespace screwsim
