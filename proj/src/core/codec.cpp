#include "robotask/codec.hpp"

#include "robotask/error.hpp"

namespace robotask {

using nlohmann::json;

void to_json(json& j, const Pose& pose) {
  j = json{{"x", pose.x}, {"y", pose.y}, {"floor", pose.floor}, {"yaw", pose.yaw}};
}

void from_json(const json& j, Pose& pose) {
  pose.x = j.at("x").get<double>();
  pose.y = j.at("y").get<double>();
  pose.floor = j.at("floor").get<std::string>();
  pose.yaw = j.value("yaw", 0.0);
}

void to_json(json& j, const ItemValue& item) {
  j = json{{"name", item.name}, {"description", item.description}};
  if (item.price) {
    j["price"] = *item.price;
  }
}

void to_json(json& j, const BoundValue& value) {
  if (const auto* item = std::get_if<ItemValue>(&value)) {
    j = json{{"type", "Item"}, {"item", *item}};
  } else {
    j = json{{"type", "Pose"}, {"pose", std::get<Pose>(value)}};
  }
}

void from_json(const json& j, BoundValue& value) {
  if (j.at("type") == "Pose") {
    value = j.at("pose").get<Pose>();
    return;
  }
  const auto& i = j.at("item");
  ItemValue item;
  item.name = i.at("name").get<std::string>();
  item.description = i.value("description", "");
  if (i.contains("price")) {
    item.price = i.at("price").get<std::int64_t>();
  }
  value = item;
}

void to_json(json& j, const TemplateVariable& var) {
  j = json{{"name", var.name}, {"kind", to_string(var.kind)}, {"synthesized", var.synthesized}};
}

void from_json(const json& j, TemplateVariable& var) {
  var.name = j.at("name").get<std::string>();
  var.kind = j.at("kind") == "Pose" ? VariableKind::Pose : VariableKind::Choice;
  var.synthesized = j.value("synthesized", false);
}

void to_json(json& j, const CompiledStep& step) {
  j = json{{"verb", step.verb}};
  std::visit(
      [&](const auto& arg) {
        using T = std::decay_t<decltype(arg)>;
        if constexpr (std::is_same_v<T, SymbolArg>) {
          j["symbol"] = arg.name;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          j["var"] = arg.name;
        } else if constexpr (std::is_same_v<T, PhraseArg>) {
          j["literal"] = arg.text;
        }
      },
      step.arg);
}

void from_json(const json& j, CompiledStep& step) {
  step.verb = j.at("verb").get<std::string>();
  if (j.contains("symbol")) {
    step.arg = SymbolArg{j.at("symbol").get<std::string>()};
  } else if (j.contains("var")) {
    step.arg = VarRef{j.at("var").get<std::string>()};
  } else if (j.contains("literal")) {
    step.arg = PhraseArg{j.at("literal").get<std::string>()};
  } else {
    step.arg = std::monostate{};
  }
}

void to_json(json& j, const TaskScript& script) {
  j = json{{"id", script.id},
           {"source_instruction_id", script.source_instruction_id},
           {"steps", script.steps},
           {"variables", script.variables}};
}

void from_json(const json& j, TaskScript& script) {
  script.id = j.at("id").get<std::string>();
  script.source_instruction_id = j.at("source_instruction_id").get<std::string>();
  script.steps = j.at("steps").get<std::vector<CompiledStep>>();
  script.variables = j.at("variables").get<std::vector<TemplateVariable>>();
}

void to_json(json& j, const OptionItem& item) {
  j = json{{"item", item.item}, {"description", item.description}};
  if (item.price) {
    j["price"] = *item.price;
  }
}

void to_json(json& j, const OptionSet& options) {
  j = json{{"question_id", options.question_id},
           {"variable", options.variable_name},
           {"options", options.options}};
}

json location_to_json(const Location& location) {
  if (const auto* s = std::get_if<std::string>(&location)) {
    return json{{"symbol", *s}};
  }
  return json{{"pose", std::get<Pose>(location)}};
}

json path_to_json(const Path& path) {
  json legs = json::array();
  for (const auto& leg : path.legs) {
    legs.push_back(json{{"kind", to_string(leg.kind)},
                        {"from", location_to_json(leg.from)},
                        {"to", location_to_json(leg.to)},
                        {"from_floor", leg.from_floor},
                        {"to_floor", leg.to_floor},
                        {"cost", leg.cost}});
  }
  return json{{"legs", legs}, {"cost", path.cost}};
}

json effect_to_json(const Effect& effect) {
  json j{{"verb", effect.verb}};
  if (!effect.item.empty()) {
    j["item"] = effect.item;
  }
  if (effect.price) {
    j["price"] = *effect.price;
  }
  if (!effect.utterance.empty()) {
    j["utterance"] = effect.utterance;
  }
  if (effect.recipient) {
    j["recipient"] = *effect.recipient;
  }
  return j;
}

json sequence_to_json(const ActionSequence& sequence) {
  json steps = json::array();
  for (const auto& s : sequence.steps) {
    steps.push_back(describe_step(s));
  }
  return json{{"instruction_id", sequence.source_instruction_id},
              {"steps", steps},
              {"variables", sequence.variables}};
}

}  // namespace robotask
