#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace robotask {

enum class VariableKind { Choice, Pose };

std::string_view to_string(VariableKind kind);

/// A 2D pose in the building frame. `floor` names a floor of the world model.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  std::string floor;
  double yaw = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

/// An item chosen from an option set, e.g. a menu entry or a drink.
struct ItemValue {
  std::string name;
  std::optional<std::int64_t> price;
  std::string description;

  friend bool operator==(const ItemValue&, const ItemValue&) = default;
};

using BoundValue = std::variant<ItemValue, Pose>;
using Bindings = std::map<std::string, BoundValue>;

/// An `@name@` placeholder. Bindings are kept by the executing session, never
/// on the variable itself, so scripts stay reusable.
struct TemplateVariable {
  std::string name;
  VariableKind kind = VariableKind::Choice;
  // Introduced by a plan pattern rather than written in the instruction text.
  bool synthesized = false;

  friend bool operator==(const TemplateVariable&, const TemplateVariable&) = default;
};

struct Literal {
  std::string text;
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct VarRef {
  std::string name;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

using Segment = std::variant<Literal, VarRef>;

struct Instruction {
  std::string id;
  std::string raw_text;
  std::vector<Segment> segments;
  // First-occurrence order, one entry per distinct name.
  std::vector<TemplateVariable> variables;
};

/// True for names drawn from `[A-Za-z0-9_-]+`.
bool is_valid_variable_name(std::string_view name);

/// Splits `text` into literal and `@name@` segments. Delimiters pair up left to
/// right. Throws Error with UnbalancedDelimiter, EmptyVariableName or
/// InvalidVariableName.
Instruction parse_instruction(std::string_view text);

/// Replaces each VarRef by its bound value; unbound references stay `@name@`.
std::string render_instruction(const Instruction& instruction, const Bindings& bindings);

std::string render_value(const BoundValue& value);

}  // namespace robotask
