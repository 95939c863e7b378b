#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ppsync/dynamics.hpp"

namespace ppsync {

inline constexpr int kSchemaVersion = 1;

using Override = std::pair<std::string, std::string>;

nlohmann::ordered_json scenario_to_json(const ScenarioConfig& cfg);

/// Throws ConfigError naming the offending key.
ScenarioConfig scenario_from_json(const nlohmann::ordered_json& doc);

bool is_builtin(std::string_view name);
std::vector<std::string> builtin_names();

/// Builtin name or path to a scenario file. Throws ConfigError when the
/// reference resolves to neither.
ScenarioConfig load_scenario(const std::string& ref);

/// Throws IoError when the file cannot be written.
void save_scenario(const ScenarioConfig& cfg, const std::filesystem::path& path);

/// Applies dotted-path overrides such as "gains.c=120" or "performance.0.rho0=5".
/// Values are parsed as JSON literals, falling back to plain strings. Every key
/// must already exist in the serialized scenario. Overriding "seed" on a
/// generated-amplitude plant redraws the amplitudes.
ScenarioConfig apply_overrides(const ScenarioConfig& cfg, const std::vector<Override>& overrides);

/// Splits "key=value"; throws ConfigError when '=' is missing.
Override parse_override(std::string_view text);

/// Effective value at a dotted key path, serialized as JSON.
std::string lookup(const ScenarioConfig& cfg, std::string_view key);

}  // namespace ppsync
