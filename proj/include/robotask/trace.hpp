#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace robotask {

enum class TraceKind {
  Planned,
  Approved,
  Reused,
  StepStarted,
  Navigated,
  Observed,
  OptionsSent,
  PoseRequested,
  EventReceived,
  VariableBound,
  ActionApplied,
  Error,
  Finished,
};

std::string_view to_string(TraceKind kind);
std::optional<TraceKind> trace_kind_from_string(std::string_view name);
const std::vector<TraceKind>& all_trace_kinds();

struct TraceEvent {
  std::uint64_t seq = 0;
  TraceKind kind = TraceKind::Error;
  nlohmann::json payload;
};

nlohmann::json to_json(const TraceEvent& event);

/// Append-only record of one session. Sequence numbers start at 1.
class ExecutionTrace {
 public:
  using Listener = std::function<void(const TraceEvent&)>;

  const TraceEvent& append(TraceKind kind, nlohmann::json payload);
  const std::vector<TraceEvent>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  // Called after every append; used by the gateway to stream Progress.
  void set_listener(Listener listener) { listener_ = std::move(listener); }

  /// One JSON object per line.
  std::string to_jsonl() const;

 private:
  std::vector<TraceEvent> events_;
  Listener listener_;
};

/// Structural checks over a finished or in-flight trace. Returns one message
/// per violation; empty means the trace is well formed.
///  - seq strictly increasing
///  - every VariableBound follows an OptionsSent/PoseRequested for the same
///    question and an EventReceived answering it
///  - accepted Select/Place answers name a question that was asked
///  - a variable is bound at most once
///  - a new question is only asked once the previous one was answered
///  - nothing but rejected-message Error events follows Finished
std::vector<std::string> check_trace(const std::vector<TraceEvent>& events);

}  // namespace robotask
