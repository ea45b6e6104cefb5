#include "robotask/script_compiler.hpp"

#include <algorithm>
#include <cctype>

#include "robotask/error.hpp"
#include "robotask/text.hpp"

namespace robotask {

const TemplateVariable* TaskScript::variable(std::string_view name) const {
  auto it = std::find_if(variables.begin(), variables.end(),
                         [&](const TemplateVariable& v) { return v.name == name; });
  return it == variables.end() ? nullptr : &*it;
}

std::string describe_step(const CompiledStep& step) {
  return std::visit(
      [&](const auto& arg) -> std::string {
        using T = std::decay_t<decltype(arg)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return step.verb;
        } else if constexpr (std::is_same_v<T, SymbolArg>) {
          return step.verb + " " + arg.name;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return step.verb + " @" + arg.name + "@";
        } else {
          return step.verb + " \"" + arg.text + "\"";
        }
      },
      step.arg);
}

std::string normalize_location_phrase(std::string_view phrase) {
  std::string cleaned;
  cleaned.reserve(phrase.size());
  for (char c : phrase) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || c == '_' || c == '/') {
      cleaned.push_back(static_cast<char>(std::tolower(u)));
    } else {
      cleaned.push_back(' ');
    }
  }
  std::vector<std::string> words;
  for (auto& w : text::split_whitespace(cleaned)) {
    if (!text::is_article(w)) {
      words.push_back(std::move(w));
    }
  }
  return text::join(words, " ");
}

const MapSymbol& resolve_symbol(std::string_view phrase, std::span<const MapSymbol> symbols) {
  const std::string key = normalize_location_phrase(phrase);
  std::vector<const MapSymbol*> hits;
  for (const auto& symbol : symbols) {
    const bool match = std::any_of(symbol.aliases.begin(), symbol.aliases.end(),
                                   [&](const std::string& a) { return a == key; });
    if (match) {
      hits.push_back(&symbol);
    }
  }
  if (hits.empty() || key.empty()) {
    throw Error(ErrorCode::UnknownLocation, std::string(phrase));
  }
  if (hits.size() > 1) {
    std::vector<std::string> names;
    for (const auto* h : hits) {
      names.push_back(h->name);
    }
    throw Error(ErrorCode::AmbiguousLocation, std::string(phrase) + " -> " + text::join(names, ", "))
        .with_candidates(std::move(names));
  }
  return *hits.front();
}

TaskScript compile(const ActionSequence& sequence, std::span<const MapSymbol> symbols,
                   const std::map<std::size_t, std::string>& overrides) {
  if (sequence.steps.empty()) {
    throw Error(ErrorCode::InvalidSequence, "empty action sequence");
  }
  TaskScript script;
  script.source_instruction_id = sequence.source_instruction_id;
  script.variables = sequence.variables;

  for (std::size_t i = 0; i < sequence.steps.size(); ++i) {
    const auto& step = sequence.steps[i];
    CompiledStep out{step.verb, std::monostate{}};
    if (const auto* ref = std::get_if<VarRef>(&step.arg)) {
      const auto* var = script.variable(ref->name);
      if (var == nullptr) {
        throw Error(ErrorCode::InvalidSequence, "undeclared @" + ref->name + "@").with_step(i);
      }
      if (step.verb == verbs::kGoTo && var->kind != VariableKind::Pose) {
        throw Error(ErrorCode::InvalidSequence, "GoTo on non-pose @" + ref->name + "@").with_step(i);
      }
      out.arg = *ref;
    } else if (const auto* phrase = std::get_if<PhraseArg>(&step.arg)) {
      if (step.verb == verbs::kGoTo) {
        if (auto pinned = overrides.find(i); pinned != overrides.end()) {
          auto it = std::find_if(symbols.begin(), symbols.end(),
                                 [&](const MapSymbol& s) { return s.name == pinned->second; });
          if (it == symbols.end()) {
            throw Error(ErrorCode::UnknownLocation, pinned->second).with_step(i);
          }
          out.arg = SymbolArg{it->name};
        } else {
          try {
            out.arg = SymbolArg{resolve_symbol(phrase->text, symbols).name};
          } catch (Error& e) {
            e.with_step(i);
            throw;
          }
        }
      } else {
        out.arg = *phrase;
      }
    } else if (step.verb == verbs::kGoTo) {
      throw Error(ErrorCode::InvalidSequence, "GoTo without destination").with_step(i);
    }
    script.steps.push_back(std::move(out));
  }

  std::string fingerprint = script.source_instruction_id;
  for (const auto& s : script.steps) {
    fingerprint += '\n';
    fingerprint += describe_step(s);
  }
  script.id = "script-" + text::hex64(text::fnv1a64(fingerprint));
  return script;
}

}  // namespace robotask
