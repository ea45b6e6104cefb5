#include "robotask/gateway/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "robotask/codec.hpp"
#include "robotask/gateway/session_hub.hpp"
#include "robotask/gateway/wire.hpp"
#include "robotask/script_store.hpp"

namespace robotask::gateway {

using nlohmann::json;

namespace {

constexpr const char* kSessionId = "scenario";

[[noreturn]] void schema_fail(const std::string& what) {
  throw Error(ErrorCode::SchemaViolation, "scenario: " + what);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

UserEventBody parse_response(const json& r) {
  const std::string type = r.at("type").get<std::string>();
  if (type == "Approve") return user_event::Approve{};
  if (type == "Reject") return user_event::Reject{};
  if (type == "Cancel") return user_event::Cancel{};
  if (type == "Select") return user_event::Select{r.at("item").get<std::string>()};
  if (type == "Place") return user_event::Place{r.at("object").get<std::string>(), r.at("pose").get<Pose>()};
  schema_fail("unknown response type " + type);
}

json response_payload(const UserEventBody& body, const std::optional<std::string>& question_id) {
  json p = json::object();
  if (const auto* s = std::get_if<user_event::Select>(&body)) {
    p["item"] = s->item;
  } else if (const auto* pl = std::get_if<user_event::Place>(&body)) {
    p["object"] = pl->object;
    p["pose"] = pl->pose;
  }
  if (question_id && (std::holds_alternative<user_event::Select>(body) ||
                      std::holds_alternative<user_event::Place>(body) ||
                      std::holds_alternative<user_event::Cancel>(body))) {
    p["question_id"] = *question_id;
  }
  return p;
}

bool same_value(const BoundValue& a, const BoundValue& b) {
  if (const auto* ia = std::get_if<ItemValue>(&a)) {
    const auto* ib = std::get_if<ItemValue>(&b);
    return ib != nullptr && ia->name == ib->name;
  }
  const auto* pb = std::get_if<Pose>(&b);
  if (pb == nullptr) {
    return false;
  }
  const auto& pa = std::get<Pose>(a);
  return pa.floor == pb->floor && std::abs(pa.x - pb->x) < 1e-9 && std::abs(pa.y - pb->y) < 1e-9;
}

}  // namespace

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  Scenario sc;
  try {
    if (!doc.is_object() || doc.value("version", 0) != 1) {
      schema_fail("expected an object with version 1");
    }
    sc.name = doc.value("name", "");
    sc.world = resolve(base_dir, doc.at("world").get<std::string>());
    sc.catalog = resolve(base_dir, doc.at("catalog").get<std::string>());
    if (doc.contains("distractors")) {
      sc.distractors = resolve(base_dir, doc.at("distractors").get<std::string>());
    }
    sc.instruction = doc.at("instruction").get<std::string>();
    if (doc.contains("noise")) {
      sc.noise.count = doc.at("noise").value("count", 0);
      sc.noise.seed = doc.at("noise").value("seed", std::uint64_t{0});
    }
    for (const auto& r : doc.value("responses", json::array())) {
      sc.responses.push_back(parse_response(r));
    }
    const auto& ex = doc.at("expect");
    const auto phase = phase_from_string(ex.at("phase").get<std::string>());
    if (!phase) {
      schema_fail("unknown phase " + ex.at("phase").get<std::string>());
    }
    sc.expect.phase = *phase;
    if (ex.contains("code")) {
      const auto code = error_code_from_string(ex.at("code").get<std::string>());
      if (!code) {
        schema_fail("unknown error code " + ex.at("code").get<std::string>());
      }
      sc.expect.code = code;
    }
    if (ex.contains("step")) {
      sc.expect.step = ex.at("step").get<std::size_t>();
    }
    const auto bindings = ex.value("bindings", json::object());
    for (const auto& [name, v] : bindings.items()) {
      if (v.is_string()) {
        sc.expect.bindings[name] = ItemValue{v.get<std::string>(), std::nullopt, ""};
      } else {
        sc.expect.bindings[name] = v.get<Pose>();
      }
    }
  } catch (const json::exception& e) {
    schema_fail(e.what());
  }
  if (sc.noise.count < 0) {
    schema_fail("noise count must be non-negative");
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw Error(ErrorCode::StorageFailure, "cannot read scenario " + file.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    schema_fail(file.string() + " is not valid JSON");
  }
  auto sc = parse_scenario(doc, file.parent_path());
  if (sc.name.empty()) {
    sc.name = file.stem().string();
  }
  return sc;
}

ExitReport run_scenario(const Scenario& scenario, const RunOptions& options) {
  std::optional<ScriptStore> store;
  if (options.store) {
    store.emplace(*options.store);
  } else {
    store.emplace();
  }

  HubConfig config;
  config.world = load_world_file(scenario.world);
  config.catalog = std::make_shared<const PlanCatalog>(load_catalog_file(scenario.catalog));
  if (scenario.distractors) {
    config.distractors = load_distractors_file(*scenario.distractors);
  }
  config.noise = options.noise.value_or(scenario.noise);
  config.store = &*store;
  SessionHub hub(std::move(config));

  ExitReport report;
  std::optional<std::string> question_id;
  const ConnectionId conn = hub.connect([&](const std::string& line) {
    report.wire.push_back(line);
    const auto m = decode_envelope(line);
    if (m.type == msg::kOptionsQuestion || m.type == msg::kPoseQuestion) {
      question_id = m.payload.value("question_id", "");
    } else if (m.type == msg::kError) {
      report.rejections.push_back(m.payload.value("code", "") + ": " + m.payload.value("message", ""));
    }
  });

  std::uint64_t seq = 0;
  const auto send = [&](std::string_view type, json payload) {
    hub.receive(conn, encode(WireMessage{kSessionId, ++seq, std::string(type), std::move(payload)}));
  };
  send(msg::kNewInstruction, json{{"text", scenario.instruction}});

  std::size_t next = 0;
  while (true) {
    auto view = hub.view(kSessionId);
    if (!view || (view->phase != Phase::AwaitingApproval && view->phase != Phase::AwaitingFeedback)) {
      break;
    }
    if (next >= scenario.responses.size()) {
      report.mismatches.push_back("ran out of responses in phase " + std::string(to_string(view->phase)));
      break;
    }
    const auto& body = scenario.responses[next++];
    if (view->reused && std::holds_alternative<user_event::Approve>(body)) {
      continue;  // approval is skipped on the reuse path
    }
    send(event_type(body), response_payload(body, view->question_id));
  }
  report.responses_used = next;

  auto view = hub.view(kSessionId);
  if (!view) {
    throw Error(ErrorCode::UnknownSession, "scenario session was not created");
  }
  report.phase = view->phase;
  report.reused = view->reused;
  report.failure = view->failure;
  report.bindings = view->bindings;
  report.trace = view->trace;

  const auto& ex = scenario.expect;
  if (report.phase != ex.phase) {
    report.mismatches.push_back("phase: expected " + std::string(to_string(ex.phase)) + ", got " +
                                std::string(to_string(report.phase)) +
                                (report.failure ? " (" + report.failure->message + ")" : ""));
  }
  if (ex.code) {
    const auto got = report.failure ? std::optional<ErrorCode>(report.failure->code) : std::nullopt;
    if (got != ex.code) {
      report.mismatches.push_back("failure code: expected " + std::string(to_string(*ex.code)) + ", got " +
                                  (got ? std::string(to_string(*got)) : std::string("none")));
    }
  }
  if (ex.step) {
    const auto got = report.failure ? report.failure->step_index : std::nullopt;
    if (got != ex.step) {
      report.mismatches.push_back("failure step: expected " + std::to_string(*ex.step) + ", got " +
                                  (got ? std::to_string(*got) : std::string("none")));
    }
  }
  for (const auto& [name, want] : ex.bindings) {
    auto it = report.bindings.find(name);
    if (it == report.bindings.end()) {
      report.mismatches.push_back("@" + name + "@: expected " + render_value(want) + ", unbound");
    } else if (!same_value(it->second, want)) {
      report.mismatches.push_back("@" + name + "@: expected " + render_value(want) + ", got " +
                                  render_value(it->second));
    }
  }
  if (report.responses_used < scenario.responses.size()) {
    report.mismatches.push_back(std::to_string(scenario.responses.size() - report.responses_used) +
                                " scripted response(s) left over");
  }
  report.ok = report.mismatches.empty();

  if (options.transcript) {
    std::ofstream out(*options.transcript, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::StorageFailure, "cannot write transcript " + options.transcript->string());
    }
    for (const auto& e : report.trace) {
      out << to_json(e).dump() << '\n';
    }
  }
  return report;
}

std::string ExitReport::summary() const {
  std::ostringstream os;
  os << (ok ? "OK" : "MISMATCH") << ": phase " << to_string(phase);
  if (failure) {
    os << " (" << to_string(failure->code) << ": " << failure->message << ")";
  }
  if (reused) {
    os << ", reused stored script";
  }
  os << "\n";
  for (const auto& [name, value] : bindings) {
    os << "  @" << name << "@ = " << render_value(value) << "\n";
  }
  for (const auto& r : rejections) {
    os << "  rejected: " << r << "\n";
  }
  for (const auto& m : mismatches) {
    os << "  - " << m << "\n";
  }
  return os.str();
}

}  // namespace robotask::gateway
