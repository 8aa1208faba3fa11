#pragma once

#include <string>

#include <json.hpp>

namespace vqalab {

// Parses the TOML subset used by run configs and recipes into a JSON
// value: table headers ([a.b]), array-of-table headers ([[a.b]]), dotted
// keys, basic/literal strings, integers, floats, booleans, arrays and
// inline tables. Dates and multi-line strings are not supported.
nlohmann::json parse_toml(const std::string& text);

nlohmann::json parse_toml_file(const std::string& path);

// Dispatches on extension: ".toml" -> parse_toml, ".json" -> JSON.
nlohmann::json parse_config_file(const std::string& path);
nlohmann::json parse_config_text(const std::string& text, const std::string& format);

}  // namespace vqalab
