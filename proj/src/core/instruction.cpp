#include "robotask/instruction.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "robotask/error.hpp"
#include "robotask/text.hpp"

namespace robotask {

std::string_view to_string(VariableKind kind) {
  return kind == VariableKind::Pose ? "Pose" : "Choice";
}

bool is_valid_variable_name(std::string_view name) {
  if (name.empty()) {
    return false;
  }
  return std::all_of(name.begin(), name.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
  });
}

Instruction parse_instruction(std::string_view text) {
  std::vector<std::size_t> delimiters;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '@') {
      delimiters.push_back(i);
    }
  }
  if (delimiters.size() % 2 != 0) {
    throw Error(ErrorCode::UnbalancedDelimiter,
                "odd number of '@' in \"" + std::string(text) + "\"");
  }

  Instruction out;
  out.raw_text = std::string(text);
  out.id = "ins-" + text::hex64(text::fnv1a64(text));

  std::size_t cursor = 0;
  for (std::size_t p = 0; p < delimiters.size(); p += 2) {
    const std::size_t open = delimiters[p];
    const std::size_t close = delimiters[p + 1];
    const std::string_view name = text.substr(open + 1, close - open - 1);
    if (name.empty()) {
      throw Error(ErrorCode::EmptyVariableName, "'@@' at offset " + std::to_string(open));
    }
    if (!is_valid_variable_name(name)) {
      throw Error(ErrorCode::InvalidVariableName, "\"" + std::string(name) + "\"");
    }
    if (open > cursor) {
      out.segments.emplace_back(Literal{std::string(text.substr(cursor, open - cursor))});
    }
    out.segments.emplace_back(VarRef{std::string(name)});
    const bool seen = std::any_of(out.variables.begin(), out.variables.end(),
                                  [&](const TemplateVariable& v) { return v.name == name; });
    if (!seen) {
      out.variables.push_back(TemplateVariable{std::string(name)});
    }
    cursor = close + 1;
  }
  if (cursor < text.size()) {
    out.segments.emplace_back(Literal{std::string(text.substr(cursor))});
  }
  return out;
}

std::string render_value(const BoundValue& value) {
  if (const auto* item = std::get_if<ItemValue>(&value)) {
    return item->name;
  }
  const auto& pose = std::get<Pose>(value);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%.2f, %.2f, %s)", pose.x, pose.y, pose.floor.c_str());
  return buf;
}

std::string render_instruction(const Instruction& instruction, const Bindings& bindings) {
  std::string out;
  for (const auto& segment : instruction.segments) {
    if (const auto* lit = std::get_if<Literal>(&segment)) {
      out += lit->text;
      continue;
    }
    const auto& ref = std::get<VarRef>(segment);
    if (auto it = bindings.find(ref.name); it != bindings.end()) {
      out += render_value(it->second);
    } else {
      out += '@';
      out += ref.name;
      out += '@';
    }
  }
  return out;
}

}  // namespace robotask
