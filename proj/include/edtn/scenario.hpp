#pragma once

#include <string>

#include "edtn/errors.hpp"
#include "edtn/sim_engine.hpp"

namespace edtn {

// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Parse a scenario document (JSON). Unknown keys are rejected;
/// diagnostics name the offending key path.
Scenario scenario_from_json(const std::string& text);

/// Read and parse a scenario file. Throws IoError when the file cannot
/// be opened, ConfigError on schema or invariant violations.
Scenario load_scenario(const std::string& path);

std::string read_file(const std::string& path);   // throws IoError
void write_file(const std::string& path, const std::string& content); // throws IoError

} // namespace edtn
