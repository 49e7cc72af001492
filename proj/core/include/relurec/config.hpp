#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "relurec/experiments.hpp"

namespace relurec {

// Flat `key = value` text. `#` starts a comment, `[section]` headers prefix
// the following keys as `section.key`. Later assignments win.
struct KeyValueConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  const std::string* find(const std::string& key) const;
};

KeyValueConfig parse_config(std::istream& is);
KeyValueConfig load_config(const std::filesystem::path& path);

// linear, relu or normalized.
PlantVariant parse_plant_variant(std::string_view name);

// Integer lists accept comma-separated items and `start:step:stop` ranges.
std::vector<int> parse_int_list(const std::string& text);
std::vector<double> parse_double_list(const std::string& text);

// Applies recognized keys (with or without a `grid.` prefix) on top of base.
// Unknown keys are rejected so that typos do not silently fall back to defaults.
GridConfig grid_config_from(const KeyValueConfig& cfg, GridConfig base = {});

}  // namespace relurec
