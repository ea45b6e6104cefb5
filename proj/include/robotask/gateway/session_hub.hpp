#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "robotask/executor.hpp"
#include "robotask/gateway/wire.hpp"
#include "robotask/perception.hpp"
#include "robotask/planner.hpp"
#include "robotask/script_store.hpp"
#include "robotask/world.hpp"

namespace robotask::gateway {

struct HubConfig {
  WorldModel world;  // every session starts from a copy
  std::shared_ptr<const PlanCatalog> catalog;
  std::vector<Distractor> distractors;
  NoiseConfig noise;
  ScriptStore* store = nullptr;
  SessionConfig session;
};

using ConnectionId = std::uint64_t;

/// Routes NDJSON lines from any number of connections to executor sessions
/// and streams each session's messages to its subscribers. Safe to call from
/// one thread per connection; calls for one session are serialized.
class SessionHub {
 public:
  using Sink = std::function<void(const std::string& line)>;

  explicit SessionHub(HubConfig config);

  ConnectionId connect(Sink sink);
  void disconnect(ConnectionId id);

  /// Handles one client line. Malformed or rejected messages produce an
  /// Error reply to the sender only.
  void receive(ConnectionId id, std::string_view line);

  /// Expires overdue questions.
  void tick(Clock::time_point now);

  struct SessionView {
    Phase phase = Phase::Idle;
    bool reused = false;
    std::optional<std::string> question_id;
    std::optional<Failure> failure;
    Bindings bindings;
    std::vector<TraceEvent> trace;
  };
  std::optional<SessionView> view(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;

 private:
  struct Connection {
    ConnectionId id = 0;
    Sink sink;
    std::mutex send_mu;
    std::atomic<bool> open{true};
    std::uint64_t error_seq = 0;  // guarded by send_mu
    std::map<std::string, std::uint64_t> last_seq;  // guarded by the hub's seq_mu_
  };
  struct Slot {
    mutable std::mutex mu;
    std::unique_ptr<Session> session;
    std::vector<std::string> history;
    std::vector<std::shared_ptr<Connection>> subscribers;
    std::uint64_t out_seq = 0;
  };

  std::shared_ptr<Connection> connection(ConnectionId id) const;
  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  void reply_error(Connection& conn, const std::string& session_id, ErrorCode code, const std::string& message,
                   std::uint64_t in_reply_to);
  static void send(Connection& conn, const std::string& line);
  static void subscribe_locked(Slot& slot, const std::shared_ptr<Connection>& conn);
  void start_session(const std::shared_ptr<Connection>& conn, const WireMessage& message);

  HubConfig config_;
  mutable std::mutex hub_mu_;
  std::map<ConnectionId, std::shared_ptr<Connection>> connections_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  ConnectionId next_connection_ = 1;
  std::uint64_t next_session_ = 1;
  std::mutex seq_mu_;
};

}  // namespace robotask::gateway
