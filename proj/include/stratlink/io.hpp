#pragma once

#include <string>

#include "json.hpp"
#include "stratlink/arterial.hpp"
#include "stratlink/shortcuts.hpp"

namespace stratlink {

using Json = nlohmann::ordered_json;

// {states, actions, sigma, tau[s][a][s'], reward[s][a], labels}; -inf as "-inf".
Json environment_to_json(const Environment& env, const RewardTable* reward = nullptr);
Environment environment_from_json(const Json& doc);
// Reads doc["reward"]; all zeros when absent.
RewardTable reward_from_json(const Json& doc, const Environment& env);

Json reward_to_json(const RewardTable& reward);

Json to_json(const PlannerConfig& config);
Json to_json(const ShortcutsSpec& spec);
Json to_json(const ArterialSpec& spec);
ShortcutsSpec shortcuts_spec_from_json(const Json& doc);
// Missing fields keep their defaults.
ArterialSpec arterial_spec_from_json(const Json& doc);

Json read_json_file(const std::string& path);

}  // namespace stratlink
