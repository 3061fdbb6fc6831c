#pragma once

#include <string>
#include <vector>

#include "msnow/netsim.hpp"

namespace msnow {

// Scenario files are plain "key = value" lines; '#' starts a comment. Every
// key is optional and an empty file gives the default settings.
ScenarioConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
ScenarioConfig parse_config_file(const std::string& path);

// Sets one key. Throws ConfigError naming the key and the accepted range.
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);

// MSNOW_<KEY> environment variables (key upper-cased) override file values.
void apply_env_overrides(ScenarioConfig& cfg, const std::string& prefix = "MSNOW_");

struct ConfigKey {
    std::string name;
    std::string range;
    std::string help;
};
const std::vector<ConfigKey>& config_keys();

// Round-trips through parse_config_text.
std::string format_config(const ScenarioConfig& cfg);

// A sweep axis such as "sensors=64:576:64" or "pairs=5,10,25". "sensors" is
// the total sensor count and is spread evenly over the subcarriers.
struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};
SweepAxis parse_sweep_axis(const std::string& spec);
void apply_sweep_value(ScenarioConfig& cfg, const std::string& key, const std::string& value);

}  // namespace msnow
