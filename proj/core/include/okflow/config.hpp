// config.hpp
// Run configuration files: JSON with sections grid / physics / solver /
// adaptivity / run. Unknown keys are errors; anything omitted takes the
// documented default.

#pragma once

#include <stdexcept>
#include <string>

#include "okflow/driver.hpp"

namespace okflow {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses and validates a config file. Throws ConfigError naming the
/// offending key on any problem.
RunConfig parse_config(const std::string& path);

/// Same, from an in-memory JSON document.
RunConfig parse_config_text(const std::string& json_text);

}  // namespace okflow
