#include "robotask/trace.hpp"

#include <array>
#include <map>
#include <set>

namespace robotask {

namespace {

constexpr std::array<std::pair<TraceKind, std::string_view>, 13> kNames = {{
    {TraceKind::Planned, "Planned"},
    {TraceKind::Approved, "Approved"},
    {TraceKind::Reused, "Reused"},
    {TraceKind::StepStarted, "StepStarted"},
    {TraceKind::Navigated, "Navigated"},
    {TraceKind::Observed, "Observed"},
    {TraceKind::OptionsSent, "OptionsSent"},
    {TraceKind::PoseRequested, "PoseRequested"},
    {TraceKind::EventReceived, "EventReceived"},
    {TraceKind::VariableBound, "VariableBound"},
    {TraceKind::ActionApplied, "ActionApplied"},
    {TraceKind::Error, "Error"},
    {TraceKind::Finished, "Finished"},
}};

}  // namespace

std::string_view to_string(TraceKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) {
      return name;
    }
  }
  return "Error";
}

std::optional<TraceKind> trace_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) {
      return k;
    }
  }
  return std::nullopt;
}

const std::vector<TraceKind>& all_trace_kinds() {
  static const std::vector<TraceKind> kinds = [] {
    std::vector<TraceKind> out;
    for (const auto& [k, _] : kNames) {
      out.push_back(k);
    }
    return out;
  }();
  return kinds;
}

nlohmann::json to_json(const TraceEvent& event) {
  return nlohmann::json{{"seq", event.seq}, {"kind", to_string(event.kind)}, {"payload", event.payload}};
}

const TraceEvent& ExecutionTrace::append(TraceKind kind, nlohmann::json payload) {
  const std::uint64_t seq = events_.empty() ? 1 : events_.back().seq + 1;
  events_.push_back(TraceEvent{seq, kind, std::move(payload)});
  if (listener_) {
    listener_(events_.back());
  }
  return events_.back();
}

std::string ExecutionTrace::to_jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<std::string> check_trace(const std::vector<TraceEvent>& events) {
  std::vector<std::string> problems;
  const auto report = [&](const TraceEvent& e, const std::string& what) {
    problems.push_back("seq " + std::to_string(e.seq) + " (" + std::string(to_string(e.kind)) + "): " + what);
  };

  std::uint64_t last_seq = 0;
  std::set<std::string> asked;             // question ids emitted
  std::set<std::string> answered;          // question ids with an accepted answer
  std::map<std::string, std::set<std::string>> offered;  // question -> variables it covers
  std::set<std::string> bound;
  std::optional<std::string> open_question;
  bool finished = false;

  for (const auto& e : events) {
    if (e.seq <= last_seq) {
      report(e, "seq not strictly increasing");
    }
    last_seq = e.seq;
    const bool rejection = e.kind == TraceKind::Error && e.payload.value("rejected", false);
    if (finished && !rejection) {
      report(e, "event after Finished");
    }
    const auto& p = e.payload;
    switch (e.kind) {
      case TraceKind::OptionsSent:
      case TraceKind::PoseRequested: {
        const std::string qid = p.value("question_id", "");
        if (qid.empty()) {
          report(e, "question without id");
          break;
        }
        if (open_question && *open_question != qid) {
          report(e, "question " + qid + " asked while " + *open_question + " is outstanding");
        }
        open_question = qid;
        asked.insert(qid);
        if (p.contains("variable") && p.at("variable").is_string()) {
          offered[qid].insert(p.at("variable").get<std::string>());
        }
        break;
      }
      case TraceKind::EventReceived: {
        const std::string qid = p.value("question_id", "");
        const std::string type = p.value("type", "");
        const bool answer = type == "Select" || type == "Place";
        if (p.value("accepted", false) && answer) {
          if (asked.count(qid) == 0) {
            report(e, "answer to unknown question " + qid);
          }
          answered.insert(qid);
          if (open_question == qid) {
            open_question.reset();
          }
        }
        break;
      }
      case TraceKind::VariableBound: {
        const std::string name = p.value("variable", "");
        const std::string qid = p.value("question_id", "");
        if (answered.count(qid) == 0) {
          report(e, "binding @" + name + "@ without an answered question");
        } else if (offered[qid].count(name) == 0) {
          report(e, "question " + qid + " did not offer @" + name + "@");
        }
        if (!bound.insert(name).second) {
          report(e, "@" + name + "@ bound twice");
        }
        break;
      }
      case TraceKind::Finished:
        finished = true;
        break;
      default:
        break;
    }
  }
  return problems;
}

}  // namespace robotask
