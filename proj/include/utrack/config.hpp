#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "utrack/scoring.hpp"
#include "utrack/synth.hpp"
#include "utrack/tracker.hpp"

namespace utrack::config {

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// `key = value` lines; '#' starts a comment, blank lines are skipped.
std::vector<KeyValue> parse_key_values(std::string_view text);

/// Applies one setting; throws utrack::Error on an unknown key or bad value.
void apply(TrackerConfig& cfg, std::string_view key, std::string_view value);
TrackerConfig tracker_config_from_text(std::string_view text, TrackerConfig base = {});
TrackerConfig load_tracker_config(const std::filesystem::path& path, TrackerConfig base = {});
/// Every field, one per line, in a form tracker_config_from_text reads back.
std::string format_tracker_config(const TrackerConfig& cfg);

nlohmann::json to_json(const TrackerConfig& cfg);
TrackerConfig tracker_config_from_json(const nlohmann::json& j);

/// Scenario files use the same syntax; each `object = x,y,w,h,vx,vy,label` line adds one object.
void apply(ScenarioSpec& spec, std::string_view key, std::string_view value);
ScenarioSpec scenario_from_text(std::string_view text, ScenarioSpec base = {});
ScenarioSpec load_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScoreReport& r);
nlohmann::json to_json(const motmetrics::EvalReport& r);

}  // namespace utrack::config
