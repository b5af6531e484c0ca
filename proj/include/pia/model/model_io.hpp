#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "pia/model/explicit_model.hpp"

namespace pia {

nlohmann::json schema_to_json(const FeatureSchema& schema);
FeatureSchema schema_from_json(const nlohmann::json& j);

/// Explicit-model JSON document:
///   { "kind", "schema": {"features": [{"name","lo","hi"}], "actions": [...]},
///     "initial": [ints], "states": [[ints]...],
///     "transitions": {state: {action: [[succ, prob]...]}},
///     "rewards": {state: {action: r}}, "labels": {state: [names]} }
nlohmann::json model_to_json(const ExplicitModel& model);

/// Throws ParseError on malformed documents and ValidationError when the
/// decoded model violates an ExplicitModel invariant.
ExplicitModel model_from_json(const nlohmann::json& j);

ExplicitModel load_explicit_model(const std::filesystem::path& path);
void save_explicit_model(const ExplicitModel& model, const std::filesystem::path& path);

/// Reads a JSON file, mapping I/O and syntax failures to ParseError.
nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace pia
