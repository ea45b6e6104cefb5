#include "robotask/executor.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "robotask/codec.hpp"
#include "robotask/text.hpp"

namespace robotask {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 6> kPhaseNames = {{
    {Phase::Idle, "Idle"},
    {Phase::AwaitingApproval, "AwaitingApproval"},
    {Phase::Executing, "Executing"},
    {Phase::AwaitingFeedback, "AwaitingFeedback"},
    {Phase::Done, "Done"},
    {Phase::Failed, "Failed"},
}};

bool is_terminal(Phase phase) { return phase == Phase::Done || phase == Phase::Failed; }

json bindings_to_json(const Bindings& bindings) {
  json out = json::object();
  for (const auto& [name, value] : bindings) {
    out[name] = value;
  }
  return out;
}

}  // namespace

std::string_view to_string(Phase phase) {
  for (const auto& [p, name] : kPhaseNames) {
    if (p == phase) {
      return name;
    }
  }
  return "Idle";
}

std::optional<Phase> phase_from_string(std::string_view name) {
  for (const auto& [p, n] : kPhaseNames) {
    if (n == name) {
      return p;
    }
  }
  return std::nullopt;
}

std::string_view event_type(const UserEventBody& body) {
  return std::visit(
      [](const auto& e) -> std::string_view {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, user_event::Approve>) return "Approve";
        if constexpr (std::is_same_v<T, user_event::Reject>) return "Reject";
        if constexpr (std::is_same_v<T, user_event::Select>) return "Select";
        if constexpr (std::is_same_v<T, user_event::Place>) return "Place";
        return "Cancel";
      },
      body);
}

json to_json(const UserEvent& event) {
  json j{{"type", event_type(event.body)}};
  if (event.question_id) {
    j["question_id"] = *event.question_id;
  }
  if (const auto* s = std::get_if<user_event::Select>(&event.body)) {
    j["item"] = s->item;
  } else if (const auto* p = std::get_if<user_event::Place>(&event.body)) {
    j["object"] = p->object;
    j["pose"] = p->pose;
  }
  return j;
}

Session::Session(std::string id, WorldModel world, SessionServices services, SessionConfig config)
    : id_(std::move(id)), world_(std::move(world)), services_(std::move(services)), config_(std::move(config)) {
  if (!services_.planner || !services_.vision || !services_.formatter) {
    throw std::invalid_argument("session needs a planner, a vision model and a formatter");
  }
}

void Session::start(std::string_view instruction_text) {
  if (phase_ != Phase::Idle || !trace_.empty()) {
    throw Error(ErrorCode::WrongPhase, "session already started");
  }
  if (services_.store != nullptr) {
    if (auto hit = services_.store->find_similar(instruction_text, config_.similarity_threshold)) {
      if (auto script = services_.store->script(hit->entry.script_id)) {
        script_ = std::move(*script);
        reused_ = true;
        json steps = json::array();
        for (const auto& s : script_->steps) {
          steps.push_back(describe_step(s));
        }
        trace_.append(TraceKind::Reused, json{{"instruction", std::string(instruction_text)},
                                              {"matched", hit->entry.instruction_text},
                                              {"score", hit->score},
                                              {"script_id", script_->id},
                                              {"steps", steps}});
        phase_ = Phase::Executing;
        step_ = 0;
        return;
      }
    }
  }
  try {
    instruction_ = parse_instruction(instruction_text);
    plan_ = plan_via_adapter(*instruction_, *services_.planner, services_.verbs);
  } catch (const Error& e) {
    fail(e, std::nullopt);
    return;
  }
  json planned = sequence_to_json(*plan_);
  planned["instruction"] = instruction_->raw_text;
  trace_.append(TraceKind::Planned, std::move(planned));
  phase_ = Phase::AwaitingApproval;
}

EventOutcome Session::reject(ErrorCode code, std::string message, const UserEvent& event) {
  trace_.append(TraceKind::Error, json{{"code", to_string(code)},
                                       {"message", message},
                                       {"rejected", true},
                                       {"event", to_json(event)}});
  return EventOutcome{false, code, std::move(message)};
}

void Session::accept(const UserEvent& event) {
  json j = to_json(event);
  j["accepted"] = true;
  trace_.append(TraceKind::EventReceived, std::move(j));
}

void Session::record_rejection(ErrorCode code, std::string_view message) {
  trace_.append(TraceKind::Error,
                json{{"code", to_string(code)}, {"message", std::string(message)}, {"rejected", true}});
}

EventOutcome Session::handle_event(const UserEvent& event) {
  if (event.session_id != id_) {
    return reject(ErrorCode::UnknownSession, "event for session " + event.session_id, event);
  }
  const auto type = event_type(event.body);

  if (std::holds_alternative<user_event::Cancel>(event.body)) {
    if (is_terminal(phase_) || phase_ == Phase::Idle) {
      return reject(ErrorCode::WrongPhase, "nothing to cancel in phase " + std::string(to_string(phase_)), event);
    }
    accept(event);
    std::optional<std::size_t> step;
    if (phase_ == Phase::Executing || phase_ == Phase::AwaitingFeedback) {
      step = question_ ? question_->step_index : step_;
    }
    fail(Error(ErrorCode::Cancelled, "cancelled by user"), step);
    return {};
  }

  if (std::holds_alternative<user_event::Approve>(event.body) ||
      std::holds_alternative<user_event::Reject>(event.body)) {
    if (phase_ != Phase::AwaitingApproval) {
      return reject(ErrorCode::WrongPhase,
                    std::string(type) + " in phase " + std::string(to_string(phase_)), event);
    }
    accept(event);
    if (std::holds_alternative<user_event::Reject>(event.body)) {
      plan_.reset();
      phase_ = Phase::Idle;
      return {};
    }
    compile_and_begin();
    return {};
  }

  // Select / Place answer the pending question.
  if (phase_ != Phase::AwaitingFeedback || !question_) {
    return reject(ErrorCode::WrongPhase, std::string(type) + " in phase " + std::string(to_string(phase_)), event);
  }
  if (!event.question_id || *event.question_id != question_->id) {
    return reject(ErrorCode::StaleQuestion,
                  "answer for " + event.question_id.value_or("<none>") + ", pending " + question_->id, event);
  }
  const Question q = *question_;

  if (q.purpose == Question::Purpose::Location) {
    const auto* select = std::get_if<user_event::Select>(&event.body);
    if (select == nullptr || q.options->find(select->item) == nullptr) {
      return reject(ErrorCode::InvalidAnswer, "pick one of the offered locations", event);
    }
    accept(event);
    location_overrides_[q.step_index] = q.options->find(select->item)->item;
    question_.reset();
    phase_ = Phase::Idle;
    compile_and_begin();
    return {};
  }

  if (const auto* select = std::get_if<user_event::Select>(&event.body)) {
    if (!q.choice_variable) {
      return reject(ErrorCode::InvalidAnswer, "question " + q.id + " expects a placement", event);
    }
    const auto* option = q.options->find(select->item);
    if (option == nullptr) {
      return reject(ErrorCode::InvalidAnswer, "\"" + select->item + "\" was not offered", event);
    }
    const OptionItem chosen = *option;
    accept(event);
    bind(*q.choice_variable, ItemValue{chosen.item, chosen.price, chosen.description}, q.id);
  } else {
    const auto& place = std::get<user_event::Place>(event.body);
    if (!q.pose_variable) {
      return reject(ErrorCode::InvalidAnswer, "question " + q.id + " does not take a placement", event);
    }
    if (!world_.has_floor(place.pose.floor)) {
      return reject(ErrorCode::InvalidAnswer, "unknown floor " + place.pose.floor, event);
    }
    std::optional<OptionItem> chosen;
    if (q.choice_variable) {
      const auto* option = q.options->find(place.object);
      if (option == nullptr) {
        return reject(ErrorCode::InvalidAnswer, "\"" + place.object + "\" was not offered", event);
      }
      chosen = *option;
    } else if (!q.pose_candidates.empty() &&
               std::find(q.pose_candidates.begin(), q.pose_candidates.end(), place.object) ==
                   q.pose_candidates.end()) {
      return reject(ErrorCode::InvalidAnswer, "\"" + place.object + "\" is not among the objects offered", event);
    }
    accept(event);
    if (chosen) {
      bind(*q.choice_variable, ItemValue{chosen->item, chosen->price, chosen->description}, q.id);
    }
    bind(*q.pose_variable, place.pose, q.id);
  }
  question_.reset();
  phase_ = Phase::Executing;
  step_ = q.step_index;
  return {};
}

void Session::compile_and_begin() {
  try {
    script_ = compile(*plan_, world_.locations, location_overrides_);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::AmbiguousLocation && e.step_index()) {
      OptionSet choices;
      choices.variable_name = "";
      for (const auto& name : e.candidates()) {
        const auto* symbol = world_.symbol(name);
        choices.options.push_back(
            OptionItem{name, std::nullopt, symbol ? text::join(symbol->aliases, ", ") : std::string{}});
      }
      Question q;
      q.purpose = Question::Purpose::Location;
      q.step_index = *e.step_index();
      q.options = std::move(choices);
      ask(std::move(q));
      return;
    }
    fail(e, e.step_index());
    return;
  }
  if (services_.store != nullptr && instruction_) {
    try {
      services_.store->save(*instruction_, *script_);
    } catch (const Error& e) {
      fail(e, std::nullopt);
      return;
    }
  }
  json steps = json::array();
  for (const auto& s : script_->steps) {
    steps.push_back(describe_step(s));
  }
  trace_.append(TraceKind::Approved, json{{"script_id", script_->id}, {"steps", steps}});
  phase_ = Phase::Executing;
  step_ = 0;
  step_announced_ = false;
}

void Session::bind(const std::string& name, BoundValue value, const std::string& question_id) {
  if (bindings_.count(name) != 0) {
    throw std::logic_error("template variable @" + name + "@ is already bound");
  }
  trace_.append(TraceKind::VariableBound, json{{"variable", name}, {"question_id", question_id}, {"value", value}});
  bindings_.emplace(name, std::move(value));
}

void Session::fail(const Error& error, std::optional<std::size_t> step) {
  Failure failure;
  failure.code = error.code();
  failure.step_index = step;
  if (step && script_ && *step < script_->steps.size()) {
    failure.message = "step " + std::to_string(*step + 1) + " (" + describe_step(script_->steps[*step]) +
                      ") failed: " + error.what();
  } else {
    failure.message = error.what();
  }
  json detail{{"code", to_string(failure.code)}, {"message", failure.message}};
  if (step) {
    detail["step"] = *step;
  }
  trace_.append(TraceKind::Error, detail);
  json finished{{"phase", "Failed"}, {"reason", to_string(failure.code)}, {"message", failure.message}};
  if (step) {
    finished["step"] = *step;
  }
  trace_.append(TraceKind::Finished, std::move(finished));
  failure_ = std::move(failure);
  question_.reset();
  phase_ = Phase::Failed;
}

std::string Session::next_question_id() { return id_ + "-q" + std::to_string(++question_counter_); }

const Question& Session::ask(Question question) {
  question.id = next_question_id();
  if (question.options) {
    question.options->question_id = question.id;
    json j{{"question_id", question.id}, {"step", question.step_index}, {"options", question.options->options}};
    if (question.purpose == Question::Purpose::Location) {
      j["purpose"] = "location";
    } else {
      j["purpose"] = "variable";
      j["variable"] = *question.choice_variable;
    }
    trace_.append(TraceKind::OptionsSent, std::move(j));
  }
  if (question.pose_variable) {
    json j{{"question_id", question.id},
           {"step", question.step_index},
           {"variable", *question.pose_variable},
           {"objects", question.pose_candidates}};
    if (question.choice_variable) {
      j["choice_variable"] = *question.choice_variable;
    }
    trace_.append(TraceKind::PoseRequested, std::move(j));
  }
  question_ = std::move(question);
  asked_at_ = config_.clock();
  phase_ = Phase::AwaitingFeedback;
  return *question_;
}

void Session::ensure_open() {
  const auto* at = std::get_if<std::string>(&world_.robot.at);
  if (at == nullptr) {
    return;
  }
  auto scene = world_.scenes.find(*at);
  if (scene == world_.scenes.end() || !scene->second.requires_open || world_.robot.opened == *at) {
    return;
  }
  json j = effect_to_json(open_container(world_));
  j["step"] = step_;
  trace_.append(TraceKind::ActionApplied, std::move(j));
}

const Question& Session::variable_expansion_round(const std::string& variable) {
  if (phase_ != Phase::Executing || !script_ || step_ >= script_->steps.size()) {
    throw Error(ErrorCode::WrongPhase, "expansion needs an executing step");
  }
  if (bindings_.count(variable) != 0) {
    throw Error(ErrorCode::InvalidBinding, "@" + variable + "@ is already bound");
  }
  const auto* var = script_->variable(variable);
  if (var == nullptr) {
    throw Error(ErrorCode::InvalidBinding, "@" + variable + "@ is not a script variable");
  }
  const auto& step = script_->steps[step_];

  if (var->kind == VariableKind::Pose) {
    Question q;
    q.step_index = step_;
    q.pose_variable = variable;
    if (world_.robot.holding) {
      q.pose_candidates.push_back(world_.robot.holding->item);
    }
    return ask(std::move(q));
  }

  const auto& tmpl = services_.prompts.lookup(step.verb);
  ensure_open();
  const Scene scene = observe(world_);
  const std::string prompt = services_.prompts.build_prompt(step.verb, variable);
  Observation obs;
  try {
    obs = services_.vision->describe(scene, prompt);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyScene) {
      throw Error(ErrorCode::NothingToOffer, "nothing to offer for @" + variable + "@");
    }
    throw;
  }
  trace_.append(TraceKind::Observed, json{{"step", step_},
                                          {"variable", variable},
                                          {"prompt", obs.prompt},
                                          {"lines", obs.lines},
                                          {"scene_digest", obs.source_scene_digest},
                                          {"injected", obs.injected}});
  OptionSet options = services_.formatter->format(obs, tmpl.schema);
  if (options.options.empty()) {
    throw Error(ErrorCode::NothingToOffer, "nothing to offer for @" + variable + "@");
  }
  options.variable_name = variable;

  Question q;
  q.step_index = step_;
  q.choice_variable = variable;
  // Offer placement in the same question when a later GoTo still needs a pose.
  for (std::size_t k = step_ + 1; k < script_->steps.size(); ++k) {
    const auto& later = script_->steps[k];
    const auto* ref = std::get_if<VarRef>(&later.arg);
    if (later.verb != verbs::kGoTo || ref == nullptr || ref->name == variable || bindings_.count(ref->name) != 0) {
      continue;
    }
    const auto* pose_var = script_->variable(ref->name);
    if (pose_var != nullptr && pose_var->kind == VariableKind::Pose) {
      q.pose_variable = ref->name;
      for (const auto& o : options.options) {
        q.pose_candidates.push_back(o.item);
      }
      break;
    }
  }
  q.options = std::move(options);
  return ask(std::move(q));
}

std::string Session::choice_item(const CompiledStep& step, const VarRef& ref) {
  const auto& value = bindings_.at(ref.name);
  const auto* item = std::get_if<ItemValue>(&value);
  if (item == nullptr) {
    throw Error(ErrorCode::InvalidBinding, step.verb + " needs an item but @" + ref.name + "@ is a pose");
  }
  return item->name;
}

bool Session::execute_step(const CompiledStep& step) {
  const auto* ref = std::get_if<VarRef>(&step.arg);
  if (ref != nullptr && bindings_.count(ref->name) == 0) {
    variable_expansion_round(ref->name);
    return false;
  }

  if (step.verb == verbs::kGoTo) {
    Location target;
    if (const auto* sym = std::get_if<SymbolArg>(&step.arg)) {
      target = sym->name;
    } else if (ref != nullptr) {
      const auto* pose = std::get_if<Pose>(&bindings_.at(ref->name));
      if (pose == nullptr) {
        throw Error(ErrorCode::InvalidBinding, "GoTo needs a pose but @" + ref->name + "@ is an item");
      }
      target = *pose;
    } else {
      throw Error(ErrorCode::InvalidSequence, "GoTo without resolved destination");
    }
    const Path path = navigate(world_, target);
    trace_.append(TraceKind::Navigated,
                  json{{"step", step_}, {"to", location_to_json(target)}, {"path", path_to_json(path)}});
    return true;
  }

  if (step.verb == verbs::kBuy || step.verb == verbs::kPick) {
    std::string item;
    std::optional<std::int64_t> quoted;
    if (ref != nullptr) {
      item = choice_item(step, *ref);
      quoted = std::get<ItemValue>(bindings_.at(ref->name)).price;
    } else if (const auto* phrase = std::get_if<PhraseArg>(&step.arg)) {
      item = phrase->text;
    } else {
      throw Error(ErrorCode::InvalidSequence, step.verb + " without an item");
    }
    ensure_open();
    const Effect effect = apply_action(world_, step.verb, item);
    json j = effect_to_json(effect);
    j["step"] = step_;
    if (quoted) {
      j["quoted_price"] = *quoted;
    }
    j["money_spent"] = world_.robot.money_spent;
    trace_.append(TraceKind::ActionApplied, std::move(j));
    return true;
  }

  if (step.verb == verbs::kPass || step.verb == verbs::kSpeak) {
    std::string arg;
    if (ref != nullptr) {
      arg = render_value(bindings_.at(ref->name));
    } else if (const auto* phrase = std::get_if<PhraseArg>(&step.arg)) {
      arg = phrase->text;
    }
    json j = effect_to_json(apply_action(world_, step.verb, arg));
    j["step"] = step_;
    trace_.append(TraceKind::ActionApplied, std::move(j));
    return true;
  }

  throw Error(ErrorCode::InvalidSequence, "no executor for verb " + step.verb);
}

void Session::run_until_blocked() {
  while (phase_ == Phase::Executing) {
    if (step_ >= script_->steps.size()) {
      phase_ = Phase::Done;
      trace_.append(TraceKind::Finished, json{{"phase", "Done"}, {"bindings", bindings_to_json(bindings_)}});
      return;
    }
    const auto& step = script_->steps[step_];
    if (!step_announced_) {
      trace_.append(TraceKind::StepStarted, json{{"step", step_}, {"action", describe_step(step)}});
      step_announced_ = true;
    }
    try {
      if (execute_step(step)) {
        ++step_;
        step_announced_ = false;
      }
    } catch (const Error& e) {
      fail(e, step_);
    }
  }
}

bool Session::check_timeout(Clock::time_point now) {
  if (phase_ != Phase::AwaitingFeedback || !config_.feedback_timeout || !question_) {
    return false;
  }
  if (now - asked_at_ < *config_.feedback_timeout) {
    return false;
  }
  fail(Error(ErrorCode::FeedbackTimeout, "no answer to " + question_->id), question_->step_index);
  return true;
}

}  // namespace robotask
