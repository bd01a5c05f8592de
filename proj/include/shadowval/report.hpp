#pragma once

#include <string>

#include "json.hpp"

namespace shadowval {

// Report skeleton shared by every subcommand: tool version, command, seed,
// and the full configuration needed to replay the run.
nlohmann::json make_report(const std::string& command, const nlohmann::json& config);

// Close out the report with a wall-time entry.
void finish_report(nlohmann::json& report, double seconds);

// Write <path> (JSON) and <path minus .json>.csv (flat key,value table).
void write_report(const nlohmann::json& report, const std::string& path);

std::string report_version();

}  // namespace shadowval
