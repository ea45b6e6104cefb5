#include "robotask/gateway/wire.hpp"

#include <algorithm>

#include "robotask/codec.hpp"
#include "robotask/error.hpp"

namespace robotask::gateway {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedMessage, what); }

const json& require(const json& payload, const char* key, json::value_t type, const std::string& msg_type) {
  if (!payload.contains(key)) {
    malformed(msg_type + ": missing \"" + key + "\"");
  }
  const auto& v = payload.at(key);
  const bool ok = type == json::value_t::number_float ? v.is_number() : v.type() == type;
  if (!ok) {
    malformed(msg_type + ": \"" + key + "\" has the wrong type");
  }
  return v;
}

void require_string(const json& payload, const char* key, const std::string& msg_type, bool non_empty = true) {
  const auto& v = require(payload, key, json::value_t::string, msg_type);
  if (non_empty && v.get<std::string>().empty()) {
    malformed(msg_type + ": \"" + key + "\" is empty");
  }
}

void validate_pose(const json& pose, const std::string& msg_type) {
  if (!pose.is_object()) {
    malformed(msg_type + ": pose must be an object");
  }
  require(pose, "x", json::value_t::number_float, msg_type);
  require(pose, "y", json::value_t::number_float, msg_type);
  require_string(pose, "floor", msg_type);
  if (pose.contains("yaw") && !pose.at("yaw").is_number()) {
    malformed(msg_type + ": \"yaw\" has the wrong type");
  }
}

std::optional<std::string> optional_question(const json& payload, const std::string& msg_type) {
  if (!payload.contains("question_id")) {
    return std::nullopt;
  }
  if (!payload.at("question_id").is_string()) {
    malformed(msg_type + ": \"question_id\" has the wrong type");
  }
  return payload.at("question_id").get<std::string>();
}

}  // namespace

const std::vector<std::string_view>& client_message_types() {
  static const std::vector<std::string_view> types = {msg::kNewInstruction, msg::kApprove, msg::kReject,
                                                      msg::kSelect,         msg::kPlace,   msg::kCancel,
                                                      msg::kSubscribe};
  return types;
}

const std::vector<std::string_view>& server_message_types() {
  static const std::vector<std::string_view> types = {msg::kPlanProposed, msg::kOptionsQuestion, msg::kPoseQuestion,
                                                      msg::kProgress,     msg::kTaskDone,        msg::kTaskFailed,
                                                      msg::kError};
  return types;
}

json to_json(const WireMessage& message) {
  return json{{"session_id", message.session_id},
              {"seq", message.seq},
              {"type", message.type},
              {"payload", message.payload}};
}

std::string encode(const WireMessage& message) { return to_json(message).dump(); }

WireMessage decode_envelope(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) {
    malformed("not valid JSON");
  }
  if (!j.is_object()) {
    malformed("message must be a JSON object");
  }
  WireMessage m;
  if (!j.contains("session_id") || !j.at("session_id").is_string()) {
    malformed("\"session_id\" must be a string");
  }
  if (!j.contains("seq") || !j.at("seq").is_number_unsigned()) {
    malformed("\"seq\" must be a non-negative integer");
  }
  if (!j.contains("type") || !j.at("type").is_string()) {
    malformed("\"type\" must be a string");
  }
  m.session_id = j.at("session_id").get<std::string>();
  m.seq = j.at("seq").get<std::uint64_t>();
  m.type = j.at("type").get<std::string>();
  if (j.contains("payload")) {
    if (!j.at("payload").is_object()) {
      malformed("\"payload\" must be an object");
    }
    m.payload = j.at("payload");
  }
  return m;
}

WireMessage decode_client(std::string_view line) {
  WireMessage m = decode_envelope(line);
  const auto& types = client_message_types();
  if (std::find(types.begin(), types.end(), m.type) == types.end()) {
    malformed("unknown message type \"" + m.type + "\"");
  }
  if (m.seq == 0) {
    malformed("\"seq\" starts at 1");
  }
  if (m.session_id.empty() && m.type != msg::kNewInstruction) {
    malformed(m.type + ": \"session_id\" is empty");
  }
  const auto& p = m.payload;
  if (m.type == msg::kNewInstruction) {
    require_string(p, "text", m.type);
  } else if (m.type == msg::kSelect) {
    require_string(p, "question_id", m.type);
    require_string(p, "item", m.type);
  } else if (m.type == msg::kPlace) {
    require_string(p, "question_id", m.type);
    require_string(p, "object", m.type);
    validate_pose(require(p, "pose", json::value_t::object, m.type), m.type);
  } else {
    optional_question(p, m.type);
  }
  return m;
}

UserEvent to_user_event(const WireMessage& message) {
  UserEvent ev;
  ev.session_id = message.session_id;
  ev.question_id = optional_question(message.payload, message.type);
  const auto& p = message.payload;
  if (message.type == msg::kApprove) {
    ev.body = user_event::Approve{};
  } else if (message.type == msg::kReject) {
    ev.body = user_event::Reject{};
  } else if (message.type == msg::kCancel) {
    ev.body = user_event::Cancel{};
  } else if (message.type == msg::kSelect) {
    ev.body = user_event::Select{p.at("item").get<std::string>()};
  } else if (message.type == msg::kPlace) {
    ev.body = user_event::Place{p.at("object").get<std::string>(), p.at("pose").get<Pose>()};
  } else {
    malformed(message.type + " is not a user event");
  }
  return ev;
}

std::vector<WireMessage> messages_for(const std::string& session_id, const TraceEvent& event, std::uint64_t& seq) {
  std::vector<WireMessage> out;
  out.push_back(WireMessage{session_id, ++seq, std::string(msg::kProgress), json{{"event", to_json(event)}}});
  const auto& p = event.payload;
  switch (event.kind) {
    case TraceKind::Planned:
      out.push_back(WireMessage{session_id, ++seq, std::string(msg::kPlanProposed), p});
      break;
    case TraceKind::OptionsSent:
      out.push_back(WireMessage{session_id, ++seq, std::string(msg::kOptionsQuestion), p});
      break;
    case TraceKind::PoseRequested:
      out.push_back(WireMessage{session_id, ++seq, std::string(msg::kPoseQuestion), p});
      break;
    case TraceKind::Finished: {
      const bool done = p.value("phase", "") == "Done";
      out.push_back(
          WireMessage{session_id, ++seq, std::string(done ? msg::kTaskDone : msg::kTaskFailed), p});
      break;
    }
    default:
      break;
  }
  return out;
}

}  // namespace robotask::gateway
