#include "robotask/planner.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>

#include "robotask/error.hpp"
#include "robotask/text.hpp"

namespace robotask {

namespace {

struct Token {
  std::string text;
  bool is_var = false;
};

struct TriggerToken {
  bool slot = false;
  std::string text;  // lowercased literal, or slot name
};

struct CompiledTrigger {
  std::size_t pattern = 0;
  std::size_t order = 0;
  std::size_t literal_count = 0;
  std::vector<TriggerToken> tokens;
};

using Captures = std::map<std::string, std::pair<std::size_t, std::size_t>>;

bool is_separator(char c) {
  return c == '.' || c == '!' || c == '?' || c == ';' || c == ':';
}

std::vector<Token> tokenize(const Instruction& instruction) {
  std::vector<Token> out;
  for (const auto& segment : instruction.segments) {
    if (const auto* ref = std::get_if<VarRef>(&segment)) {
      out.push_back(Token{ref->name, true});
      continue;
    }
    const std::string& s = std::get<Literal>(segment).text;
    std::string word;
    const auto flush = [&] {
      if (!word.empty()) {
        out.push_back(Token{std::move(word), false});
        word.clear();
      }
    };
    for (char c : s) {
      if (std::isspace(static_cast<unsigned char>(c)) || is_separator(c)) {
        flush();
      } else if (c == ',') {
        flush();
        out.push_back(Token{",", false});
      } else {
        word.push_back(c);
      }
    }
    flush();
  }
  return out;
}

std::string token_text(const Token& t) {
  return t.is_var ? "@" + t.text + "@" : t.text;
}

std::string join_tokens(const std::vector<Token>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) {
      out += ' ';
    }
    out += token_text(tokens[i]);
  }
  return out;
}

std::vector<TriggerToken> parse_trigger(std::string_view trigger) {
  std::vector<TriggerToken> out;
  for (auto& word : text::split_whitespace(trigger)) {
    if (word.size() > 2 && word.front() == '{' && word.back() == '}') {
      out.push_back(TriggerToken{true, word.substr(1, word.size() - 2)});
    } else {
      out.push_back(TriggerToken{false, text::to_lower(word)});
    }
  }
  return out;
}

bool match_from(const std::vector<TriggerToken>& trigger, std::size_t ti,
                const std::vector<Token>& clause, std::size_t ci, Captures& captures) {
  if (ti == trigger.size()) {
    return ci == clause.size();
  }
  const auto& tt = trigger[ti];
  if (!tt.slot) {
    if (ci >= clause.size() || clause[ci].is_var || text::to_lower(clause[ci].text) != tt.text) {
      return false;
    }
    return match_from(trigger, ti + 1, clause, ci + 1, captures);
  }
  for (std::size_t end = ci + 1; end <= clause.size(); ++end) {
    captures[tt.text] = {ci, end};
    if (match_from(trigger, ti + 1, clause, end, captures)) {
      return true;
    }
  }
  captures.erase(tt.text);
  return false;
}

std::vector<CompiledTrigger> compile_triggers(const PlanCatalog& catalog) {
  std::vector<CompiledTrigger> out;
  for (std::size_t p = 0; p < catalog.patterns.size(); ++p) {
    for (const auto& trigger : catalog.patterns[p].triggers) {
      CompiledTrigger ct;
      ct.pattern = p;
      ct.order = out.size();
      ct.tokens = parse_trigger(trigger);
      ct.literal_count = static_cast<std::size_t>(std::count_if(
          ct.tokens.begin(), ct.tokens.end(), [](const TriggerToken& t) { return !t.slot; }));
      out.push_back(std::move(ct));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CompiledTrigger& a, const CompiledTrigger& b) {
    if (a.literal_count != b.literal_count) {
      return a.literal_count > b.literal_count;
    }
    return a.tokens.size() > b.tokens.size();
  });
  return out;
}

bool is_slot_ref(std::string_view arg) {
  return arg.size() > 2 && arg.front() == '{' && arg.back() == '}';
}

bool is_var_ref(std::string_view arg) {
  return arg.size() > 2 && arg.front() == '@' && arg.back() == '@';
}

StepArg resolve_capture(const std::vector<Token>& clause, std::size_t begin, std::size_t end) {
  std::size_t first = begin;
  while (first < end && !clause[first].is_var && text::is_article(text::to_lower(clause[first].text))) {
    ++first;
  }
  if (end - first == 1 && clause[first].is_var) {
    return VarRef{clause[first].text};
  }
  return PhraseArg{join_tokens(clause, begin, end)};
}

std::vector<std::vector<Token>> split_clauses(const std::vector<Token>& tokens,
                                              const std::vector<std::string>& connectives) {
  std::vector<std::vector<Token>> clauses(1);
  for (const auto& t : tokens) {
    const bool is_connective =
        !t.is_var && std::any_of(connectives.begin(), connectives.end(),
                                 [&](const std::string& c) { return text::iequals(c, t.text); });
    if (is_connective) {
      if (!clauses.back().empty()) {
        clauses.emplace_back();
      }
    } else {
      clauses.back().push_back(t);
    }
  }
  if (clauses.back().empty()) {
    clauses.pop_back();
  }
  return clauses;
}

VariableKind usage_kind(std::string_view verb) {
  return verb == verbs::kGoTo ? VariableKind::Pose : VariableKind::Choice;
}

// Assigns kinds from usage and appends synthesized variables.
void settle_variables(const Instruction& instruction, const std::vector<SynthesizedVariable>& synthesized,
                      ActionSequence& seq) {
  seq.variables = instruction.variables;
  std::map<std::string, VariableKind> used;
  for (const auto& step : seq.steps) {
    const auto* ref = std::get_if<VarRef>(&step.arg);
    if (ref == nullptr) {
      continue;
    }
    const VariableKind kind = usage_kind(step.verb);
    auto [it, inserted] = used.emplace(ref->name, kind);
    if (!inserted && it->second != kind) {
      throw Error(ErrorCode::ConflictingVariableKind,
                  "@" + ref->name + "@ is used both as a destination and as an item");
    }
    const bool known = std::any_of(seq.variables.begin(), seq.variables.end(),
                                   [&](const TemplateVariable& v) { return v.name == ref->name; });
    if (!known) {
      auto decl = std::find_if(synthesized.begin(), synthesized.end(),
                               [&](const SynthesizedVariable& s) { return s.name == ref->name; });
      if (decl == synthesized.end()) {
        throw Error(ErrorCode::UncoveredVariable, "@" + ref->name + "@ is not declared");
      }
      if (decl->kind != kind) {
        throw Error(ErrorCode::ConflictingVariableKind,
                    "@" + ref->name + "@ declared " + std::string(to_string(decl->kind)));
      }
      seq.variables.push_back(TemplateVariable{ref->name, decl->kind, true});
    }
  }
  for (auto& v : seq.variables) {
    if (auto it = used.find(v.name); it != used.end()) {
      v.kind = it->second;
    }
  }
}

bool requires_arg(std::string_view verb) {
  return verb == verbs::kGoTo || verb == verbs::kBuy || verb == verbs::kPick || verb == verbs::kSpeak;
}

}  // namespace

VerbRegistry VerbRegistry::builtin() {
  VerbRegistry r;
  for (auto v : {verbs::kGoTo, verbs::kBuy, verbs::kPick, verbs::kPass, verbs::kSpeak}) {
    r.add(v);
  }
  return r;
}

bool VerbRegistry::add(std::string_view name) {
  if (name.empty() || contains(name)) {
    return false;
  }
  names_.emplace_back(name);
  return true;
}

bool VerbRegistry::contains(std::string_view name) const { return canonical(name).has_value(); }

std::optional<std::string> VerbRegistry::canonical(std::string_view name) const {
  for (const auto& n : names_) {
    if (text::iequals(n, name)) {
      return n;
    }
  }
  return std::nullopt;
}

std::string describe_step(const ActionStep& step) {
  std::string head;
  if (step.verb == verbs::kGoTo) {
    head = "Go to";
  } else if (step.verb == verbs::kSpeak) {
    head = "Say";
  } else {
    head = step.verb;
  }
  return std::visit(
      [&](const auto& arg) -> std::string {
        using T = std::decay_t<decltype(arg)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return head;
        } else if constexpr (std::is_same_v<T, PhraseArg>) {
          return head + " " + arg.text;
        } else {
          if (step.verb == verbs::kGoTo) {
            return head + " the @" + arg.name + "@";
          }
          return head + " @" + arg.name + "@";
        }
      },
      step.arg);
}

PlanCatalog load_catalog(const nlohmann::json& doc) {
  const auto fail = [](const std::string& why) { throw Error(ErrorCode::SchemaViolation, "catalog: " + why); };
  if (!doc.is_object() || doc.value("version", 0) != 1) {
    fail("expected an object with version 1");
  }
  PlanCatalog catalog;
  if (doc.contains("verbs")) {
    for (const auto& v : doc.at("verbs")) {
      catalog.verbs.add(v.get<std::string>());
    }
  }
  catalog.connectives = doc.value("connectives", std::vector<std::string>{"and", "then", ","});
  if (!doc.contains("patterns") || !doc.at("patterns").is_array() || doc.at("patterns").empty()) {
    fail("patterns must be a non-empty array");
  }
  try {
    for (const auto& p : doc.at("patterns")) {
      PlanPattern pattern;
      pattern.name = p.value("name", "");
      pattern.triggers = p.at("triggers").get<std::vector<std::string>>();
      for (const auto& s : p.value("synthesize", nlohmann::json::array())) {
        SynthesizedVariable sv;
        sv.name = s.at("name").get<std::string>();
        sv.kind = s.value("kind", "Pose") == "Choice" ? VariableKind::Choice : VariableKind::Pose;
        if (!is_valid_variable_name(sv.name)) {
          fail("pattern " + pattern.name + ": bad synthesized name " + sv.name);
        }
        pattern.synthesize.push_back(sv);
      }
      for (const auto& e : p.at("emit")) {
        EmitSpec spec;
        const auto verb = catalog.verbs.canonical(e.at("verb").get<std::string>());
        if (!verb) {
          fail("pattern " + pattern.name + ": unknown verb " + e.at("verb").get<std::string>());
        }
        spec.verb = *verb;
        spec.arg = e.value("arg", "");
        pattern.emits.push_back(spec);
      }
      if (pattern.triggers.empty() || pattern.emits.empty()) {
        fail("pattern " + pattern.name + " needs triggers and emit");
      }
      for (const auto& spec : pattern.emits) {
        if (is_slot_ref(spec.arg)) {
          const std::string slot = spec.arg.substr(1, spec.arg.size() - 2);
          for (const auto& trig : pattern.triggers) {
            const auto tokens = parse_trigger(trig);
            const bool has = std::any_of(tokens.begin(), tokens.end(),
                                         [&](const TriggerToken& t) { return t.slot && t.text == slot; });
            if (!has) {
              fail("pattern " + pattern.name + ": trigger '" + trig + "' lacks slot {" + slot + "}");
            }
          }
        } else if (is_var_ref(spec.arg)) {
          const std::string name = spec.arg.substr(1, spec.arg.size() - 2);
          const bool declared = std::any_of(pattern.synthesize.begin(), pattern.synthesize.end(),
                                            [&](const SynthesizedVariable& s) { return s.name == name; });
          if (!declared) {
            fail("pattern " + pattern.name + ": @" + name + "@ not declared in synthesize");
          }
        }
      }
      catalog.patterns.push_back(std::move(pattern));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
  return catalog;
}

PlanCatalog load_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::SchemaViolation, "cannot open catalog " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
  return load_catalog(doc);
}

ActionSequence plan(const Instruction& instruction, const PlanCatalog& catalog) {
  const auto triggers = compile_triggers(catalog);
  const auto tokens = tokenize(instruction);

  ActionSequence seq;
  seq.source_instruction_id = instruction.id;
  std::vector<SynthesizedVariable> synthesized;

  for (const auto& clause : split_clauses(tokens, catalog.connectives)) {
    const CompiledTrigger* hit = nullptr;
    Captures captures;
    for (const auto& trig : triggers) {
      captures.clear();
      if (match_from(trig.tokens, 0, clause, 0, captures)) {
        hit = &trig;
        break;
      }
    }
    if (hit == nullptr) {
      throw Error(ErrorCode::UnmatchedClause, join_tokens(clause, 0, clause.size()));
    }
    const auto& pattern = catalog.patterns[hit->pattern];
    for (const auto& spec : pattern.emits) {
      ActionStep step{spec.verb, std::monostate{}};
      if (is_slot_ref(spec.arg)) {
        const auto [b, e] = captures.at(spec.arg.substr(1, spec.arg.size() - 2));
        step.arg = resolve_capture(clause, b, e);
      } else if (is_var_ref(spec.arg)) {
        step.arg = VarRef{spec.arg.substr(1, spec.arg.size() - 2)};
      } else if (!spec.arg.empty()) {
        step.arg = PhraseArg{spec.arg};
      }
      seq.steps.push_back(std::move(step));
    }
    for (const auto& s : pattern.synthesize) {
      synthesized.push_back(s);
    }
  }

  settle_variables(instruction, synthesized, seq);
  validate_sequence(instruction, seq, catalog.verbs);
  return seq;
}

void validate_sequence(const Instruction& instruction, const ActionSequence& sequence,
                       const VerbRegistry& registry) {
  if (sequence.steps.empty()) {
    throw Error(ErrorCode::InvalidSequence, "empty action sequence");
  }
  std::set<std::string> referenced;
  std::map<std::string, VariableKind> used;
  for (std::size_t i = 0; i < sequence.steps.size(); ++i) {
    const auto& step = sequence.steps[i];
    const auto canonical = registry.canonical(step.verb);
    if (!canonical || *canonical != step.verb) {
      throw Error(ErrorCode::ValidationFailure, "unknown verb " + step.verb).with_step(i);
    }
    const bool has_arg = !std::holds_alternative<std::monostate>(step.arg);
    if (requires_arg(step.verb) && !has_arg) {
      throw Error(ErrorCode::ValidationFailure, step.verb + " requires an argument").with_step(i);
    }
    if (step.verb == verbs::kPass && has_arg) {
      throw Error(ErrorCode::ValidationFailure, "Pass takes no argument").with_step(i);
    }
    if (const auto* ref = std::get_if<VarRef>(&step.arg)) {
      auto decl = std::find_if(sequence.variables.begin(), sequence.variables.end(),
                               [&](const TemplateVariable& v) { return v.name == ref->name; });
      if (decl == sequence.variables.end()) {
        throw Error(ErrorCode::ValidationFailure, "@" + ref->name + "@ is not a sequence variable")
            .with_step(i);
      }
      const VariableKind kind = usage_kind(step.verb);
      if (decl->kind != kind) {
        throw Error(ErrorCode::ConflictingVariableKind, "@" + ref->name + "@").with_step(i);
      }
      referenced.insert(ref->name);
    }
  }
  for (const auto& v : instruction.variables) {
    auto decl = std::find_if(sequence.variables.begin(), sequence.variables.end(),
                             [&](const TemplateVariable& sv) { return sv.name == v.name; });
    if (decl == sequence.variables.end() || referenced.count(v.name) == 0) {
      throw Error(ErrorCode::UncoveredVariable, v.name);
    }
  }
}

CatalogPlanner::CatalogPlanner(std::shared_ptr<const PlanCatalog> catalog) : catalog_(std::move(catalog)) {}

ActionSequence CatalogPlanner::propose(const Instruction& instruction) { return plan(instruction, *catalog_); }

ActionSequence plan_via_adapter(const Instruction& instruction, PlannerAdapter& adapter,
                                const VerbRegistry& registry) {
  ActionSequence seq;
  try {
    seq = adapter.propose(instruction);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::AdapterFailure, e.what());
  }
  try {
    validate_sequence(instruction, seq, registry);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationFailure) {
      throw;
    }
    Error wrapped(ErrorCode::ValidationFailure, std::string(to_string(e.code())) + "(" + e.detail() + ")");
    if (e.step_index()) {
      wrapped.with_step(*e.step_index());
    }
    throw wrapped;
  }
  return seq;
}

}  // namespace robotask
