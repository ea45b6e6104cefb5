#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "robotask/executor.hpp"
#include "robotask/trace.hpp"

namespace robotask::gateway {

namespace msg {
// server -> client
inline constexpr std::string_view kPlanProposed = "PlanProposed";
inline constexpr std::string_view kOptionsQuestion = "OptionsQuestion";
inline constexpr std::string_view kPoseQuestion = "PoseQuestion";
inline constexpr std::string_view kProgress = "Progress";
inline constexpr std::string_view kTaskDone = "TaskDone";
inline constexpr std::string_view kTaskFailed = "TaskFailed";
inline constexpr std::string_view kError = "Error";
// client -> server
inline constexpr std::string_view kNewInstruction = "NewInstruction";
inline constexpr std::string_view kApprove = "Approve";
inline constexpr std::string_view kReject = "Reject";
inline constexpr std::string_view kSelect = "Select";
inline constexpr std::string_view kPlace = "Place";
inline constexpr std::string_view kCancel = "Cancel";
inline constexpr std::string_view kSubscribe = "Subscribe";
}  // namespace msg

const std::vector<std::string_view>& client_message_types();
const std::vector<std::string_view>& server_message_types();

struct WireMessage {
  std::string session_id;
  std::uint64_t seq = 0;
  std::string type;
  nlohmann::json payload = nlohmann::json::object();
};

nlohmann::json to_json(const WireMessage& message);

/// One line of NDJSON, without the trailing newline.
std::string encode(const WireMessage& message);

/// Parses and validates a client -> server line. Throws MalformedMessage for
/// bad JSON, unknown types or payloads that do not match the schema.
WireMessage decode_client(std::string_view line);

/// Parses any envelope without payload validation (used by clients and tests).
WireMessage decode_envelope(std::string_view line);

/// Select/Place/Approve/Reject/Cancel as an executor event. Throws
/// MalformedMessage for other types.
UserEvent to_user_event(const WireMessage& message);

/// Server -> client messages derived from one trace event: a Progress
/// carrying the event, followed by the typed message for Planned,
/// OptionsSent, PoseRequested and Finished. `seq` is advanced per message.
std::vector<WireMessage> messages_for(const std::string& session_id, const TraceEvent& event,
                                      std::uint64_t& seq);

}  // namespace robotask::gateway
