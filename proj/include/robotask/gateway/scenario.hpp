#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robotask/executor.hpp"
#include "robotask/perception.hpp"
#include "robotask/trace.hpp"

namespace robotask::gateway {

struct ScenarioExpectation {
  Phase phase = Phase::Done;
  std::optional<ErrorCode> code;
  std::optional<std::size_t> step;
  std::map<std::string, BoundValue> bindings;  // subset that must match
};

/// Headless reproduction file. Paths are resolved against the file's
/// directory when loaded from disk.
struct Scenario {
  std::string name;
  std::filesystem::path world;
  std::filesystem::path catalog;
  std::optional<std::filesystem::path> distractors;
  std::string instruction;
  NoiseConfig noise;
  std::vector<UserEventBody> responses;
  ScenarioExpectation expect;
};

Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& file);

struct RunOptions {
  std::optional<NoiseConfig> noise;  // overrides the scenario's
  std::optional<std::filesystem::path> transcript;
  std::optional<std::filesystem::path> store;  // persistent store; in-memory when unset
};

struct ExitReport {
  bool ok = false;
  Phase phase = Phase::Idle;
  bool reused = false;
  std::optional<Failure> failure;
  Bindings bindings;
  std::vector<std::string> mismatches;  // empty when ok
  std::vector<std::string> rejections;  // Error replies received while feeding responses
  std::size_t responses_used = 0;
  std::vector<TraceEvent> trace;
  std::vector<std::string> wire;  // server -> client lines as received

  std::string summary() const;
};

/// Runs the scenario through a SessionHub exactly as a wire client would.
/// Throws Error for unreadable world/catalog/store files.
ExitReport run_scenario(const Scenario& scenario, const RunOptions& options = {});

}  // namespace robotask::gateway
