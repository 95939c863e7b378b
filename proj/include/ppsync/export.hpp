#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "ppsync/dynamics.hpp"
#include "ppsync/sim.hpp"

namespace ppsync {

inline constexpr int kCsvHeaderLines = 8;

/// Shortest round-trip-safe text with 17 significant digits.
std::string format_number(double v);

/// Wide trajectory table: eight '#' metadata lines, a column-name row, then
/// t, x, u, e, eps, rho per agent channel and V.
void write_trajectory_csv(std::ostream& out, const SimRun& run, const ScenarioConfig& cfg);
void write_trajectory_csv(const std::filesystem::path& path, const SimRun& run,
                          const ScenarioConfig& cfg);

/// t, x per agent channel and the leader, for phase-plane plots.
void write_phase_csv(const std::filesystem::path& path, const SimRun& run, const ScenarioConfig& cfg);

nlohmann::ordered_json gain_report_json(const GainReport& report);

/// Gain report, violations, chatter, steady state and envelope extremes.
/// `diverged_at` marks a run that stopped early.
nlohmann::ordered_json run_report(const SimRun& run, const ScenarioConfig& cfg,
                                  std::optional<double> diverged_at = std::nullopt);

/// Column mapping for an external plotting tool.
std::string plot_recipe(const SimRun& run, const std::string& csv_name);

/// Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ppsync
