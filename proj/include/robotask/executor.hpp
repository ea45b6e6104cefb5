#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "robotask/error.hpp"
#include "robotask/instruction.hpp"
#include "robotask/perception.hpp"
#include "robotask/planner.hpp"
#include "robotask/script_compiler.hpp"
#include "robotask/script_store.hpp"
#include "robotask/trace.hpp"
#include "robotask/world.hpp"

namespace robotask {

enum class Phase { Idle, AwaitingApproval, Executing, AwaitingFeedback, Done, Failed };

std::string_view to_string(Phase phase);
std::optional<Phase> phase_from_string(std::string_view name);

struct Failure {
  ErrorCode code = ErrorCode::Cancelled;
  std::string message;  // user-facing report
  std::optional<std::size_t> step_index;
};

/// The one outstanding question of a session. A variable question may carry
/// a choice part (options), a pose part, or both; a location question asks
/// the user to pick among ambiguous map symbols.
struct Question {
  enum class Purpose { Variable, Location };

  std::string id;
  std::size_t step_index = 0;
  Purpose purpose = Purpose::Variable;
  std::optional<OptionSet> options;
  std::optional<std::string> choice_variable;
  std::optional<std::string> pose_variable;
  std::vector<std::string> pose_candidates;
};

namespace user_event {
struct Approve {};
struct Reject {};
struct Select {
  std::string item;
};
struct Place {
  std::string object;
  Pose pose;
};
struct Cancel {};
}  // namespace user_event

using UserEventBody =
    std::variant<user_event::Approve, user_event::Reject, user_event::Select, user_event::Place, user_event::Cancel>;

struct UserEvent {
  std::string session_id;
  std::optional<std::string> question_id;
  UserEventBody body;
};

std::string_view event_type(const UserEventBody& body);
nlohmann::json to_json(const UserEvent& event);

/// Whether an event was applied. Rejected events leave the state untouched
/// and are logged as Error trace events.
struct EventOutcome {
  bool accepted = true;
  std::optional<ErrorCode> rejection;
  std::string message;
};

using Clock = std::chrono::steady_clock;

struct SessionConfig {
  double similarity_threshold = 0.8;
  // Unset: questions never expire (headless scenario runs).
  std::optional<std::chrono::milliseconds> feedback_timeout;
  std::function<Clock::time_point()> clock = [] { return Clock::now(); };
};

/// Collaborators a session calls out to. `store` may be null.
struct SessionServices {
  std::shared_ptr<PlannerAdapter> planner;
  VerbRegistry verbs = VerbRegistry::builtin();
  std::shared_ptr<VisionModel> vision;
  std::shared_ptr<OptionFormatter> formatter = std::make_shared<RuleFormatter>();
  PromptLibrary prompts = PromptLibrary::builtin();
  ScriptStore* store = nullptr;
};

/// Suspendable interpreter for one instruction. Not thread-safe: callers
/// funnel every call for a session through one queue or lock.
class Session {
 public:
  Session(std::string id, WorldModel world, SessionServices services, SessionConfig config = {});

  const std::string& id() const { return id_; }

  /// Reuses a similar stored script (phase Executing) or parses and plans the
  /// instruction (phase AwaitingApproval). Errors end in Failed.
  void start(std::string_view instruction_text);

  EventOutcome handle_event(const UserEvent& event);

  /// Executes steps until Done, Failed or AwaitingFeedback. No-op in other
  /// phases.
  void run_until_blocked();

  /// Observes and asks about an unbound Buy/Pick variable at the current
  /// step (options, plus a placement when a later GoTo needs a pose), or
  /// asks for a pose. Moves the session to AwaitingFeedback.
  const Question& variable_expansion_round(const std::string& variable);

  /// Fails the session with FeedbackTimeout once a question is older than
  /// the configured timeout. Returns true when that happened.
  bool check_timeout(Clock::time_point now);

  /// Logs a message rejected before it reached the session (gateway-level).
  void record_rejection(ErrorCode code, std::string_view message);

  Phase phase() const { return phase_; }
  std::size_t step_index() const { return step_; }
  const ExecutionTrace& trace() const { return trace_; }
  ExecutionTrace& trace() { return trace_; }
  const Bindings& bindings() const { return bindings_; }
  const std::optional<Question>& pending_question() const { return question_; }
  const std::optional<ActionSequence>& proposed_plan() const { return plan_; }
  const std::optional<TaskScript>& script() const { return script_; }
  const std::optional<Failure>& failure() const { return failure_; }
  const WorldModel& world() const { return world_; }
  bool reused() const { return reused_; }

 private:
  EventOutcome reject(ErrorCode code, std::string message, const UserEvent& event);
  void accept(const UserEvent& event);
  void fail(const Error& error, std::optional<std::size_t> step);
  void compile_and_begin();
  bool execute_step(const CompiledStep& step);
  void ensure_open();
  void bind(const std::string& name, BoundValue value, const std::string& question_id);
  const Question& ask(Question question);
  std::string next_question_id();
  std::string choice_item(const CompiledStep& step, const VarRef& ref);

  std::string id_;
  WorldModel world_;
  SessionServices services_;
  SessionConfig config_;

  Phase phase_ = Phase::Idle;
  std::size_t step_ = 0;
  bool step_announced_ = false;
  bool reused_ = false;
  std::optional<Instruction> instruction_;
  std::optional<ActionSequence> plan_;
  std::optional<TaskScript> script_;
  std::map<std::size_t, std::string> location_overrides_;
  Bindings bindings_;
  std::optional<Question> question_;
  Clock::time_point asked_at_{};
  std::size_t question_counter_ = 0;
  std::optional<Failure> failure_;
  ExecutionTrace trace_;
};

}  // namespace robotask
