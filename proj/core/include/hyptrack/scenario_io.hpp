#pragma once

// Scenario and tracker configuration files (JSON).
//
// A scenario file holds the simulation setup and, optionally, a "tracker"
// section. Unknown keys and wrong types are rejected with a ConfigError whose
// field() is the dotted path of the offending key.

#include "hyptrack/simulator.hpp"
#include "hyptrack/tracker.hpp"

#include <filesystem>
#include <string>

namespace hyptrack {

inline constexpr int kScenarioSchemaVersion = 1;

struct ScenarioFile {
    ScenarioConfig scenario;
    TrackerConfig tracker;
};

[[nodiscard]] ScenarioFile parse_scenario(const std::string& json_text);
[[nodiscard]] std::string scenario_to_json(const ScenarioFile& file);

/// Parses a standalone tracker section (same keys as "tracker").
[[nodiscard]] TrackerConfig parse_tracker_config(const std::string& json_text);
[[nodiscard]] std::string tracker_config_to_json(const TrackerConfig& cfg);

/// Reads a scenario file. Missing or unreadable files raise InputError.
[[nodiscard]] ScenarioFile load_scenario(const std::filesystem::path& path);

/// A preset name resolves to the shipped preset with its tuned tracker
/// settings; anything else is read as a path.
[[nodiscard]] ScenarioFile load_scenario_or_preset(const std::string& name_or_path);

/// Shipped preset together with tracker settings suited to it.
[[nodiscard]] ScenarioFile preset_file(const std::string& name);

}  // namespace hyptrack
