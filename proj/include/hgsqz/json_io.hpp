#pragma once

// JSON documents exchanged with the outside world: scenario configs in,
// reports out. Key order of emitted documents is fixed.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "hgsqz/modes.hpp"
#include "hgsqz/readout.hpp"
#include "hgsqz/scenario.hpp"

namespace hgsqz {

using ojson = nlohmann::ordered_json;

// Strict parse: unknown keys and wrong types raise ConfigError naming the
// field path (e.g. "sources[1].squeeze_db").
ScenarioConfig config_from_json(const nlohmann::json& doc);
// Parses text; syntax errors are reported with line and column.
ScenarioConfig config_from_text(const std::string& text);
// Throws ConfigError("config not found: ...") for a missing file.
ScenarioConfig load_config(const std::filesystem::path& path);

ojson config_to_json(const ScenarioConfig& config);
ojson mode_report_to_json(const ModePowerReport& report);
ojson loss_estimate_to_json(const LossEstimate& estimate);
ojson compensation_plan_to_json(const CompensationPlan& plan);
ojson scenario_report_to_json(const ScenarioReport& report, const ScenarioConfig& config,
                              bool include_trace = false);

}  // namespace hgsqz
