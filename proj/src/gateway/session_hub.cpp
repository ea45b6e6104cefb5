#include "robotask/gateway/session_hub.hpp"

#include <algorithm>

namespace robotask::gateway {

using nlohmann::json;

SessionHub::SessionHub(HubConfig config) : config_(std::move(config)) {
  if (!config_.catalog) {
    throw std::invalid_argument("hub needs a plan catalog");
  }
}

ConnectionId SessionHub::connect(Sink sink) {
  std::lock_guard lock(hub_mu_);
  auto conn = std::make_shared<Connection>();
  conn->id = next_connection_++;
  conn->sink = std::move(sink);
  connections_.emplace(conn->id, conn);
  return conn->id;
}

void SessionHub::disconnect(ConnectionId id) {
  std::shared_ptr<Connection> conn;
  {
    std::lock_guard lock(hub_mu_);
    auto it = connections_.find(id);
    if (it == connections_.end()) {
      return;
    }
    conn = it->second;
    connections_.erase(it);
  }
  conn->open = false;
}

std::shared_ptr<SessionHub::Connection> SessionHub::connection(ConnectionId id) const {
  std::lock_guard lock(hub_mu_);
  auto it = connections_.find(id);
  return it == connections_.end() ? nullptr : it->second;
}

std::shared_ptr<SessionHub::Slot> SessionHub::slot(const std::string& session_id) const {
  std::lock_guard lock(hub_mu_);
  auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : it->second;
}

void SessionHub::send(Connection& conn, const std::string& line) {
  if (!conn.open) {
    return;
  }
  std::lock_guard lock(conn.send_mu);
  conn.sink(line);
}

void SessionHub::reply_error(Connection& conn, const std::string& session_id, ErrorCode code,
                             const std::string& message, std::uint64_t in_reply_to) {
  if (!conn.open) {
    return;
  }
  std::lock_guard lock(conn.send_mu);
  WireMessage reply{session_id, ++conn.error_seq, std::string(msg::kError),
                    json{{"code", to_string(code)}, {"message", message}, {"in_reply_to", in_reply_to}}};
  conn.sink(encode(reply));
}

void SessionHub::subscribe_locked(Slot& slot, const std::shared_ptr<Connection>& conn) {
  if (std::find(slot.subscribers.begin(), slot.subscribers.end(), conn) != slot.subscribers.end()) {
    return;
  }
  slot.subscribers.push_back(conn);
  for (const auto& line : slot.history) {
    send(*conn, line);
  }
}

void SessionHub::start_session(const std::shared_ptr<Connection>& conn, const WireMessage& message) {
  std::string id = message.session_id;
  auto fresh = std::make_shared<Slot>();
  std::unique_lock fresh_lock(fresh->mu);
  {
    std::lock_guard lock(hub_mu_);
    if (id.empty()) {
      do {
        id = "s-" + std::to_string(next_session_++);
      } while (sessions_.count(id) != 0);
    } else if (sessions_.count(id) != 0) {
      id.clear();
    }
    if (!id.empty()) {
      sessions_.emplace(id, fresh);
    }
  }
  if (id.empty()) {
    fresh_lock.unlock();
    auto existing = slot(message.session_id);
    const std::string why = "session " + message.session_id + " already exists";
    {
      std::lock_guard lock(existing->mu);
      if (existing->session) {
        existing->session->record_rejection(ErrorCode::WrongPhase, why);
      }
    }
    reply_error(*conn, message.session_id, ErrorCode::WrongPhase, why, message.seq);
    return;
  }

  SessionServices services;
  services.planner = std::make_shared<CatalogPlanner>(config_.catalog);
  services.verbs = config_.catalog->verbs;
  services.vision = std::make_shared<MockVisionModel>(config_.noise, config_.distractors);
  services.store = config_.store;
  fresh->session = std::make_unique<Session>(id, config_.world, std::move(services), config_.session);
  Slot* raw = fresh.get();
  fresh->session->trace().set_listener([raw, id](const TraceEvent& event) {
    for (auto& m : messages_for(id, event, raw->out_seq)) {
      raw->history.push_back(encode(m));
      for (const auto& sub : raw->subscribers) {
        send(*sub, raw->history.back());
      }
    }
  });
  subscribe_locked(*fresh, conn);
  fresh->session->start(message.payload.at("text").get<std::string>());
  fresh->session->run_until_blocked();
}

void SessionHub::receive(ConnectionId id, std::string_view line) {
  auto conn = connection(id);
  if (!conn) {
    return;
  }
  WireMessage message;
  try {
    message = decode_client(line);
  } catch (const Error& e) {
    // Best effort: attribute the rejection to a known session.
    std::string session_id;
    std::uint64_t seq = 0;
    try {
      auto env = decode_envelope(line);
      session_id = env.session_id;
      seq = env.seq;
    } catch (const Error&) {
    }
    if (auto s = session_id.empty() ? nullptr : slot(session_id)) {
      std::lock_guard lock(s->mu);
      if (s->session) {
        s->session->record_rejection(e.code(), e.detail());
      }
    }
    reply_error(*conn, session_id, e.code(), e.detail(), seq);
    return;
  }

  if (!message.session_id.empty()) {
    std::lock_guard lock(seq_mu_);
    auto& last = conn->last_seq[message.session_id];
    if (message.seq <= last) {
      const std::string why =
          "seq " + std::to_string(message.seq) + " is not above " + std::to_string(last);
      if (auto s = slot(message.session_id)) {
        std::lock_guard slock(s->mu);
        if (s->session) {
          s->session->record_rejection(ErrorCode::MalformedMessage, why);
        }
      }
      reply_error(*conn, message.session_id, ErrorCode::MalformedMessage, why, message.seq);
      return;
    }
    last = message.seq;
  }

  if (message.type == msg::kNewInstruction) {
    start_session(conn, message);
    return;
  }

  auto s = slot(message.session_id);
  if (!s) {
    reply_error(*conn, message.session_id, ErrorCode::UnknownSession, "unknown session " + message.session_id,
                message.seq);
    return;
  }
  std::lock_guard lock(s->mu);
  if (!s->session) {
    reply_error(*conn, message.session_id, ErrorCode::UnknownSession, "unknown session " + message.session_id,
                message.seq);
    return;
  }
  subscribe_locked(*s, conn);
  if (message.type == msg::kSubscribe) {
    return;
  }
  const EventOutcome outcome = s->session->handle_event(to_user_event(message));
  if (!outcome.accepted) {
    reply_error(*conn, message.session_id, outcome.rejection.value_or(ErrorCode::InvalidAnswer), outcome.message,
                message.seq);
    return;
  }
  s->session->run_until_blocked();
}

void SessionHub::tick(Clock::time_point now) {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(hub_mu_);
    for (const auto& [_, s] : sessions_) {
      slots.push_back(s);
    }
  }
  for (const auto& s : slots) {
    std::lock_guard lock(s->mu);
    if (s->session) {
      s->session->check_timeout(now);
    }
  }
}

std::optional<SessionHub::SessionView> SessionHub::view(const std::string& session_id) const {
  auto s = slot(session_id);
  if (!s) {
    return std::nullopt;
  }
  std::lock_guard lock(s->mu);
  if (!s->session) {
    return std::nullopt;
  }
  SessionView v;
  v.phase = s->session->phase();
  v.reused = s->session->reused();
  if (const auto& q = s->session->pending_question()) {
    v.question_id = q->id;
  }
  v.failure = s->session->failure();
  v.bindings = s->session->bindings();
  v.trace = s->session->trace().events();
  return v;
}

std::vector<std::string> SessionHub::session_ids() const {
  std::lock_guard lock(hub_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) {
    ids.push_back(id);
  }
  return ids;
}

}  // namespace robotask::gateway
