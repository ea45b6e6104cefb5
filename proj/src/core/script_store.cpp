#include "robotask/script_store.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "robotask/codec.hpp"
#include "robotask/error.hpp"
#include "robotask/text.hpp"

namespace robotask {

namespace {

std::string clean_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || c == '_') {
      out.push_back(static_cast<char>(std::tolower(u)));
    } else if (std::isspace(u)) {
      out.push_back(' ');
    } else if (u >= 0x80) {
      out.push_back(c);  // keep non-ASCII bytes as word characters
    } else {
      out.push_back(' ');
    }
  }
  return out;
}

}  // namespace

std::string normalize_instruction_text(std::string_view input) {
  std::vector<Segment> segments;
  try {
    segments = parse_instruction(input).segments;
  } catch (const Error&) {
    segments = {Literal{std::string(input)}};
  }
  std::vector<std::string> words;
  for (const auto& segment : segments) {
    if (const auto* ref = std::get_if<VarRef>(&segment)) {
      words.push_back("@" + ref->name + "@");
      continue;
    }
    for (auto& w : text::split_whitespace(clean_literal(std::get<Literal>(segment).text))) {
      if (!text::is_article(w)) {
        words.push_back(std::move(w));
      }
    }
  }
  return text::join(words, " ");
}

std::set<std::string> similarity_tokens(std::string_view normalized) {
  auto words = text::split_whitespace(normalized);
  return {words.begin(), words.end()};
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) {
    return 1.0;
  }
  std::size_t common = 0;
  for (const auto& t : a) {
    common += b.count(t);
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

ScriptStore::ScriptStore(std::filesystem::path file) : file_(std::move(file)) { load(); }

void ScriptStore::load() {
  std::ifstream in(*file_);
  if (!in) {
    return;  // a missing file is an empty store
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) {
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      StoreEntry entry;
      entry.instruction_text = j.at("text").get<std::string>();
      entry.normalized_text = j.at("normalized").get<std::string>();
      entry.script_id = j.at("script_id").get<std::string>();
      entry.created_at = j.at("seq").get<std::uint64_t>();
      auto script = j.at("script").get<TaskScript>();
      if (script.id != entry.script_id) {
        throw Error(ErrorCode::StorageFailure, "script id mismatch");
      }
      scripts_[script.id] = std::move(script);
      auto [it, inserted] = by_normalized_.emplace(entry.normalized_text, entry);
      if (!inserted) {
        it->second.script_id = entry.script_id;
        it->second.instruction_text = entry.instruction_text;
        it->second.created_at = std::min(it->second.created_at, entry.created_at);
      }
      next_seq_ = std::max(next_seq_, entry.created_at + 1);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::StorageFailure,
                  file_->string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void ScriptStore::append_line(const StoreEntry& entry, const TaskScript& script) {
  std::ofstream out(*file_, std::ios::app);
  if (!out) {
    throw Error(ErrorCode::StorageFailure, "cannot open " + file_->string());
  }
  const nlohmann::json j{{"text", entry.instruction_text},
                         {"normalized", entry.normalized_text},
                         {"script_id", entry.script_id},
                         {"seq", entry.created_at},
                         {"script", script}};
  out << j.dump() << '\n';
  out.flush();
  if (!out) {
    throw Error(ErrorCode::StorageFailure, "write failed: " + file_->string());
  }
}

StoreEntry ScriptStore::save(const Instruction& instruction, const TaskScript& script) {
  std::lock_guard lock(mu_);
  if (script.source_instruction_id != instruction.id) {
    throw Error(ErrorCode::InvalidArgument,
                "script " + script.id + " was compiled from " + script.source_instruction_id + ", not " +
                    instruction.id);
  }
  StoreEntry entry;
  entry.instruction_text = instruction.raw_text;
  entry.normalized_text = normalize_instruction_text(instruction.raw_text);
  entry.script_id = script.id;
  if (auto it = by_normalized_.find(entry.normalized_text); it != by_normalized_.end()) {
    entry.created_at = it->second.created_at;
  } else {
    entry.created_at = next_seq_++;
  }
  if (file_) {
    append_line(entry, script);
  }
  scripts_[script.id] = script;
  by_normalized_[entry.normalized_text] = entry;
  return entry;
}

std::optional<StoreHit> ScriptStore::find_similar(std::string_view text, double threshold) const {
  std::lock_guard lock(mu_);
  const auto query = similarity_tokens(normalize_instruction_text(text));
  std::optional<StoreHit> best;
  for (const auto& [normalized, entry] : by_normalized_) {
    const double score = jaccard(query, similarity_tokens(normalized));
    if (score < threshold) {
      continue;
    }
    if (!best || score > best->score || (score == best->score && entry.created_at < best->entry.created_at)) {
      best = StoreHit{entry, score};
    }
  }
  return best;
}

std::optional<TaskScript> ScriptStore::script(std::string_view script_id) const {
  std::lock_guard lock(mu_);
  auto it = scripts_.find(std::string(script_id));
  if (it == scripts_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::vector<StoreEntry> ScriptStore::entries() const {
  std::lock_guard lock(mu_);
  std::vector<StoreEntry> out;
  for (const auto& [_, e] : by_normalized_) {
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(),
            [](const StoreEntry& a, const StoreEntry& b) { return a.created_at < b.created_at; });
  return out;
}

void ScriptStore::clear() {
  std::lock_guard lock(mu_);
  by_normalized_.clear();
  scripts_.clear();
  next_seq_ = 1;
  if (file_) {
    std::ofstream out(*file_, std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::StorageFailure, "cannot truncate " + file_->string());
    }
  }
}

}  // namespace robotask
