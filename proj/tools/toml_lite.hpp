#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace fixcalc::cli {

/// Parses the TOML subset used by experiment configs into a JSON object:
/// `[a.b]` table headers, `key = value` pairs, `#` comments, basic and literal strings,
/// integers, floats, booleans and (nested, multi-line) arrays.
/// Throws Error(Config) with the line number on malformed input.
nlohmann::json parse_toml(std::string_view text);

nlohmann::json parse_toml_file(const std::string& path);

}  // namespace fixcalc::cli
