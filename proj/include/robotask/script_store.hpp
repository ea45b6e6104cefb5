#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "robotask/instruction.hpp"
#include "robotask/script_compiler.hpp"

namespace robotask {

struct StoreEntry {
  std::string instruction_text;
  std::string normalized_text;
  std::string script_id;
  std::uint64_t created_at = 0;  // monotonic sequence number
};

struct StoreHit {
  StoreEntry entry;
  double score = 0.0;
};

/// Lowercase tokens without articles or punctuation; template variables stay
/// as `@name@` tokens.
std::string normalize_instruction_text(std::string_view text);
std::set<std::string> similarity_tokens(std::string_view normalized);
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Instruction -> script database. With a backing file every save appends one
/// JSON line (`text`, `normalized`, `script_id`, `seq`, `script`); loading
/// replays the log. All members are safe to call from several threads.
class ScriptStore {
 public:
  ScriptStore() = default;  // in-memory only
  explicit ScriptStore(std::filesystem::path file);

  /// Throws InvalidArgument when the script was not compiled from
  /// `instruction`, StorageFailure on I/O errors.
  StoreEntry save(const Instruction& instruction, const TaskScript& script);

  /// Best entry with Jaccard score >= threshold; ties go to the oldest entry.
  std::optional<StoreHit> find_similar(std::string_view text, double threshold) const;

  std::optional<TaskScript> script(std::string_view script_id) const;
  std::vector<StoreEntry> entries() const;  // ordered by created_at
  void clear();

  const std::optional<std::filesystem::path>& file() const { return file_; }

 private:
  void load();
  void append_line(const StoreEntry& entry, const TaskScript& script);

  std::optional<std::filesystem::path> file_;
  std::map<std::string, StoreEntry> by_normalized_;
  std::map<std::string, TaskScript> scripts_;
  std::uint64_t next_seq_ = 1;
  mutable std::mutex mu_;
};

}  // namespace robotask
