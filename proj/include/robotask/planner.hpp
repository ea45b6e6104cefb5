#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "robotask/instruction.hpp"

namespace robotask {

namespace verbs {
inline constexpr std::string_view kGoTo = "GoTo";
inline constexpr std::string_view kBuy = "Buy";
inline constexpr std::string_view kPick = "Pick";
inline constexpr std::string_view kPass = "Pass";
inline constexpr std::string_view kSpeak = "Speak";
// Not plannable; the executor inserts it before Buy/Pick at closed containers.
inline constexpr std::string_view kOpen = "Open";
}  // namespace verbs

/// Known action functions. Lookup is case-insensitive; the stored spelling is
/// canonical.
class VerbRegistry {
 public:
  static VerbRegistry builtin();

  // Returns false when a verb with the same case-folded name already exists.
  bool add(std::string_view name);
  bool contains(std::string_view name) const;
  std::optional<std::string> canonical(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

struct PhraseArg {
  std::string text;
  friend bool operator==(const PhraseArg&, const PhraseArg&) = default;
};

using StepArg = std::variant<std::monostate, PhraseArg, VarRef>;

struct ActionStep {
  std::string verb;
  StepArg arg;
  friend bool operator==(const ActionStep&, const ActionStep&) = default;
};

struct ActionSequence {
  std::string source_instruction_id;
  std::vector<ActionStep> steps;
  // Instruction variables first, then synthesized ones in order of use.
  std::vector<TemplateVariable> variables;
};

/// "Go to the Subway", "Buy @food@", "Pass". A GoTo on a variable reads
/// "Go to the @user@".
std::string describe_step(const ActionStep& step);

// One step a pattern emits. `arg` is empty (no argument), a slot reference
// "{name}", a variable "@name@", or fixed literal text.
struct EmitSpec {
  std::string verb;
  std::string arg;
};

struct SynthesizedVariable {
  std::string name;
  VariableKind kind = VariableKind::Pose;
};

struct PlanPattern {
  std::string name;
  // Token patterns, e.g. "go to {place}". `{slot}` captures one or more tokens.
  std::vector<std::string> triggers;
  std::vector<EmitSpec> emits;
  std::vector<SynthesizedVariable> synthesize;
};

struct PlanCatalog {
  std::vector<std::string> connectives;
  std::vector<PlanPattern> patterns;
  VerbRegistry verbs = VerbRegistry::builtin();
};

PlanCatalog load_catalog(const nlohmann::json& doc);
PlanCatalog load_catalog_file(const std::filesystem::path& path);

/// Deterministic pattern planner: splits the instruction into clauses on the
/// catalog connectives and matches each clause longest trigger first.
/// Throws UnmatchedClause, UncoveredVariable or ConflictingVariableKind.
ActionSequence plan(const Instruction& instruction, const PlanCatalog& catalog);

/// Checks verb membership, argument arity, variable kinds and coverage.
/// Throws the specific planner ErrorCode on the first problem found.
void validate_sequence(const Instruction& instruction, const ActionSequence& sequence,
                       const VerbRegistry& registry);

/// Seam for an external language-model planner.
class PlannerAdapter {
 public:
  virtual ~PlannerAdapter() = default;
  virtual ActionSequence propose(const Instruction& instruction) = 0;
};

/// The bundled adapter: wraps `plan` over a catalog.
class CatalogPlanner : public PlannerAdapter {
 public:
  explicit CatalogPlanner(std::shared_ptr<const PlanCatalog> catalog);
  ActionSequence propose(const Instruction& instruction) override;
  const PlanCatalog& catalog() const { return *catalog_; }

 private:
  std::shared_ptr<const PlanCatalog> catalog_;
};

/// Runs the adapter and re-validates its output. Adapter exceptions become
/// AdapterFailure; rejected output becomes ValidationFailure.
ActionSequence plan_via_adapter(const Instruction& instruction, PlannerAdapter& adapter,
                                const VerbRegistry& registry);

}  // namespace robotask
