#pragma once

#include <optional>
#include <string>

#include "bendsim/sim.hpp"

namespace bendsim {

const char* scenario_kind_name(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(const std::string& name);

// parse + validate; unknown keys and out-of-range values raise ConfigError
// naming the offending field
SimConfig parse_config(const std::string& yaml_text);
SimConfig load_config(const std::string& path);

// resolved snapshot; parse_config(dump_config(c)) reproduces the run
std::string dump_config(const SimConfig& cfg);

void validate_config(const SimConfig& cfg);

// shipped presets for the named scenarios
SimConfig preset_config(ScenarioKind kind);

}  // namespace bendsim
