#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "robotask/map_symbol.hpp"
#include "robotask/planner.hpp"

namespace robotask {

struct SymbolArg {
  std::string name;
  friend bool operator==(const SymbolArg&, const SymbolArg&) = default;
};

using CompiledArg = std::variant<std::monostate, SymbolArg, VarRef, PhraseArg>;

struct CompiledStep {
  std::string verb;
  CompiledArg arg;
  friend bool operator==(const CompiledStep&, const CompiledStep&) = default;
};

/// Executable, binding-free form of an approved action sequence.
struct TaskScript {
  std::string id;
  std::string source_instruction_id;
  std::vector<CompiledStep> steps;
  std::vector<TemplateVariable> variables;

  const TemplateVariable* variable(std::string_view name) const;
};

/// "GoTo /eng2/2f/subway-front", "Buy @food@", "Pass".
std::string describe_step(const CompiledStep& step);

/// Exact alias match after normalisation. Throws UnknownLocation or
/// AmbiguousLocation (with the candidate names attached).
const MapSymbol& resolve_symbol(std::string_view phrase, std::span<const MapSymbol> symbols);

/// Resolves every GoTo phrase to a map symbol. `overrides` pins the symbol for
/// a step index, which is how an earlier ambiguity answered by the user is
/// applied. Errors carry the failing step index.
TaskScript compile(const ActionSequence& sequence, std::span<const MapSymbol> symbols,
                   const std::map<std::size_t, std::string>& overrides = {});

}  // namespace robotask
