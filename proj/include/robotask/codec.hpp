#pragma once

#include <json.hpp>

#include "robotask/instruction.hpp"
#include "robotask/perception.hpp"
#include "robotask/planner.hpp"
#include "robotask/script_compiler.hpp"
#include "robotask/world.hpp"

// JSON encodings shared by the trace, the script store and the wire protocol.
namespace robotask {

void to_json(nlohmann::json& j, const Pose& pose);
void from_json(const nlohmann::json& j, Pose& pose);

void to_json(nlohmann::json& j, const ItemValue& item);
void to_json(nlohmann::json& j, const BoundValue& value);
void from_json(const nlohmann::json& j, BoundValue& value);

void to_json(nlohmann::json& j, const TemplateVariable& var);
void from_json(const nlohmann::json& j, TemplateVariable& var);

void to_json(nlohmann::json& j, const CompiledStep& step);
void from_json(const nlohmann::json& j, CompiledStep& step);

void to_json(nlohmann::json& j, const TaskScript& script);
void from_json(const nlohmann::json& j, TaskScript& script);

void to_json(nlohmann::json& j, const OptionItem& item);
void to_json(nlohmann::json& j, const OptionSet& options);

nlohmann::json location_to_json(const Location& location);
nlohmann::json path_to_json(const Path& path);
nlohmann::json effect_to_json(const Effect& effect);
nlohmann::json sequence_to_json(const ActionSequence& sequence);

}  // namespace robotask
