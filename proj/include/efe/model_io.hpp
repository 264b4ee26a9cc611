#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "efe/model.hpp"

namespace efe {

/// Parses the model file layout; shape checks are left to validate_*.
RawModel raw_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RawModel& raw);

using AnyModel = std::variant<FiniteMdp, FinitePomdp>;

/// Validates as an MDP or POMDP according to the "type" field.
AnyModel validate_any(const RawModel& raw);

nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

AnyModel load_model(const std::string& path);
FiniteMdp load_mdp(const std::string& path);
FinitePomdp load_pomdp(const std::string& path);
void save_model(const std::string& path, const RawModel& raw);

nlohmann::json to_json(const Episode& ep);
Episode episode_from_json(const nlohmann::json& j);

/// Stable textual form used by every report writer (2-space indent, trailing newline).
std::string dump(const nlohmann::json& j);

}  // namespace efe
