#include "robotask/executor.hpp"

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "robotask/error.hpp"

namespace robotask {
namespace {

using testing::eng2;
using testing::services;

const Pose kTable{22.3, -3.9, "7f", 1.57};

std::vector<TraceKind> kinds(const Session& s) {
  std::vector<TraceKind> out;
  for (const auto& e : s.trace().events()) out.push_back(e.kind);
  return out;
}

std::size_t count(const Session& s, TraceKind k) {
  std::size_t n = 0;
  for (const auto& e : s.trace().events()) n += e.kind == k ? 1 : 0;
  return n;
}

const TraceEvent* last(const Session& s, TraceKind k) {
  const TraceEvent* found = nullptr;
  for (const auto& e : s.trace().events())
    if (e.kind == k) found = &e;
  return found;
}

UserEvent ev(const Session& s, UserEventBody body, std::optional<std::string> qid = std::nullopt) {
  return UserEvent{s.id(), std::move(qid), std::move(body)};
}

std::string qid(const Session& s) { return s.pending_question()->id; }

void approve(Session& s) {
  ASSERT_TRUE(s.handle_event(ev(s, user_event::Approve{})).accepted);
  s.run_until_blocked();
}

TEST(Session, SubwayPlanAwaitsApproval) {
  Session s("s1", eng2(), services(NoiseConfig{2, 42}));
  s.start("Go to the Subway and buy @food@.");
  EXPECT_EQ(s.phase(), Phase::AwaitingApproval);
  ASSERT_TRUE(s.proposed_plan());
  EXPECT_EQ(s.proposed_plan()->steps.size(), 2u);
  EXPECT_EQ(kinds(s), (std::vector<TraceKind>{TraceKind::Planned}));
}

TEST(Session, SubwayFlow) {
  Session s("s1", eng2(), services(NoiseConfig{2, 42}));
  s.start("Go to the Subway and buy @food@.");
  approve(s);
  ASSERT_EQ(s.phase(), Phase::AwaitingFeedback);
  const auto& q = *s.pending_question();
  EXPECT_EQ(q.step_index, 1u);
  EXPECT_EQ(q.choice_variable, std::optional<std::string>("food"));
  EXPECT_FALSE(q.pose_variable);
  ASSERT_EQ(q.options->options.size(), 4u);
  EXPECT_EQ(s.world().robot.at, Location(std::string("/eng2/2f/subway-front")));

  ASSERT_TRUE(s.handle_event(ev(s, user_event::Select{"Chili Chicken"}, qid(s))).accepted);
  s.run_until_blocked();
  EXPECT_EQ(s.phase(), Phase::Done);
  EXPECT_EQ(std::get<ItemValue>(s.bindings().at("food")).name, "Chili Chicken");
  EXPECT_EQ(s.world().robot.money_spent, 590);
  EXPECT_TRUE(check_trace(s.trace().events()).empty());
}

TEST(Session, FridgeCombinedPlacement) {
  Session s("s2", eng2(), services());
  s.start("Go to the fridge and give me @drink@.");
  approve(s);
  ASSERT_EQ(s.phase(), Phase::AwaitingFeedback);
  const auto& q = *s.pending_question();
  EXPECT_EQ(q.choice_variable, std::optional<std::string>("drink"));
  EXPECT_EQ(q.pose_variable, std::optional<std::string>("user"));
  EXPECT_EQ(q.pose_candidates, (std::vector<std::string>{"Wonda", "Georgia", "Boss"}));
  // Open is logged before the observation.
  const auto events = s.trace().events();
  std::size_t open_at = 0, observed_at = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].kind == TraceKind::ActionApplied && events[i].payload.value("verb", "") == "Open") open_at = i;
    if (events[i].kind == TraceKind::Observed) observed_at = i;
  }
  EXPECT_LT(open_at, observed_at);
  EXPECT_GT(open_at, 0u);

  ASSERT_TRUE(s.handle_event(ev(s, user_event::Place{"Georgia", kTable}, qid(s))).accepted);
  s.run_until_blocked();
  ASSERT_EQ(s.phase(), Phase::Done);
  EXPECT_EQ(std::get<Pose>(s.bindings().at("user")), kTable);
  ASSERT_EQ(s.world().robot.delivered.size(), 1u);
  EXPECT_EQ(s.world().robot.delivered[0].item, "Georgia");
  EXPECT_EQ(s.world().robot.delivered[0].recipient, kTable);
  EXPECT_EQ(count(s, TraceKind::VariableBound), 2u);
  EXPECT_TRUE(check_trace(s.trace().events()).empty());
}

TEST(Session, SelectOnlyThenPoseAtGoTo) {
  Session s("s3", eng2(), services());
  s.start("Go to the fridge and give me @drink@.");
  approve(s);
  ASSERT_TRUE(s.handle_event(ev(s, user_event::Select{"Boss"}, qid(s))).accepted);
  s.run_until_blocked();
  ASSERT_EQ(s.phase(), Phase::AwaitingFeedback);
  const auto& q = *s.pending_question();
  EXPECT_EQ(q.step_index, 2u);
  EXPECT_EQ(q.pose_variable, std::optional<std::string>("user"));
  EXPECT_FALSE(q.choice_variable);
  EXPECT_EQ(q.pose_candidates, (std::vector<std::string>{"Boss"}));
  EXPECT_FALSE(s.handle_event(ev(s, user_event::Select{"Boss"}, qid(s))).accepted);
  EXPECT_FALSE(s.handle_event(ev(s, user_event::Place{"Wonda", kTable}, qid(s))).accepted);
  ASSERT_TRUE(s.handle_event(ev(s, user_event::Place{"Boss", kTable}, qid(s))).accepted);
  s.run_until_blocked();
  EXPECT_EQ(s.phase(), Phase::Done);
  EXPECT_TRUE(check_trace(s.trace().events()).empty());
}

TEST(Session, StaleAndWrongPhaseAreRejectedWithoutStateChange) {
  Session s("s4", eng2(), services(NoiseConfig{2, 42}));
  s.start("Go to the Subway and buy @food@.");
  const auto outcome = s.handle_event(ev(s, user_event::Select{"Chili Chicken"}, std::string("q-x")));
  EXPECT_FALSE(outcome.accepted);
  EXPECT_EQ(outcome.rejection, ErrorCode::WrongPhase);
  EXPECT_EQ(s.phase(), Phase::AwaitingApproval);
  approve(s);
  const auto before = s.trace().size();
  const auto stale = s.handle_event(ev(s, user_event::Select{"Chili Chicken"}, std::string("q-old")));
  EXPECT_EQ(stale.rejection, ErrorCode::StaleQuestion);
  EXPECT_EQ(s.trace().size(), before + 1);
  EXPECT_EQ(s.trace().events().back().kind, TraceKind::Error);
  EXPECT_EQ(s.phase(), Phase::AwaitingFeedback);
  EXPECT_TRUE(s.bindings().empty());

  const auto not_offered = s.handle_event(ev(s, user_event::Select{"Tuna"}, qid(s)));
  EXPECT_EQ(not_offered.rejection, ErrorCode::InvalidAnswer);
  const auto approve_again = s.handle_event(ev(s, user_event::Approve{}));
  EXPECT_EQ(approve_again.rejection, ErrorCode::WrongPhase);
  const auto other_session = s.handle_event(UserEvent{"other", std::nullopt, user_event::Cancel{}});
  EXPECT_EQ(other_session.rejection, ErrorCode::UnknownSession);
  EXPECT_EQ(s.phase(), Phase::AwaitingFeedback);
  EXPECT_TRUE(check_trace(s.trace().events()).empty());
}

TEST(Session, HallucinatedSelectionFailsAtBuyStep) {
  Session s("s5", eng2(), services(NoiseConfig{2, 42}));
  s.start("Go to the Subway and buy @food@.");
  approve(s);
  ASSERT_TRUE(s.handle_event(ev(s, user_event::Select{"Parmesan"}, qid(s))).accepted);
  s.run_until_blocked();
  ASSERT_EQ(s.phase(), Phase::Failed);
  EXPECT_EQ(s.failure()->code, ErrorCode::ItemNotPresent);
  EXPECT_EQ(s.failure()->step_index, std::optional<std::size_t>(1));
  EXPECT_NE(s.failure()->message.find("Parmesan"), std::string::npos);
  EXPECT_EQ(s.world().robot.money_spent, 0);
  EXPECT_EQ(last(s, TraceKind::Finished)->payload.at("reason"), "ItemNotPresent");
}

TEST(Session, RejectReturnsToIdleAndCancelFails) {
  Session a("s6", eng2(), services());
  a.start("Go to the fridge and give me @drink@.");
  ASSERT_TRUE(a.handle_event(ev(a, user_event::Reject{})).accepted);
  EXPECT_EQ(a.phase(), Phase::Idle);
  EXPECT_FALSE(a.handle_event(ev(a, user_event::Cancel{})).accepted);

  Session b("s7", eng2(), services());
  b.start("Go to the fridge and give me @drink@.");
  approve(b);
  ASSERT_TRUE(b.handle_event(ev(b, user_event::Cancel{}, qid(b))).accepted);
  EXPECT_EQ(b.phase(), Phase::Failed);
  EXPECT_EQ(b.failure()->code, ErrorCode::Cancelled);
  EXPECT_EQ(b.failure()->step_index, std::optional<std::size_t>(1));
  EXPECT_FALSE(b.pending_question());
  EXPECT_FALSE(b.handle_event(ev(b, user_event::Cancel{})).accepted);
  EXPECT_TRUE(check_trace(b.trace().events()).empty());
}

TEST(Session, PlanErrorsFail) {
  Session s("s8", eng2(), services());
  s.start("dance wildly");
  EXPECT_EQ(s.phase(), Phase::Failed);
  EXPECT_EQ(s.failure()->code, ErrorCode::UnmatchedClause);
  EXPECT_THROW(s.start("again"), Error);

  Session t("s9", eng2(), services());
  t.start("go to @x");
  EXPECT_EQ(t.failure()->code, ErrorCode::UnbalancedDelimiter);

  Session u("s10", eng2(), services());
  u.start("go to the moon");
  approve(u);
  EXPECT_EQ(u.phase(), Phase::Failed);
  EXPECT_EQ(u.failure()->code, ErrorCode::UnknownLocation);
  EXPECT_EQ(u.failure()->step_index, std::optional<std::size_t>(0));
}

TEST(Session, PassWithEmptyHandsFails) {
  Session s("s11", eng2(), services());
  s.start("pass it");
  approve(s);
  EXPECT_EQ(s.phase(), Phase::Failed);
  EXPECT_EQ(s.failure()->code, ErrorCode::NotHolding);
  EXPECT_EQ(s.failure()->step_index, std::optional<std::size_t>(0));
}

TEST(Session, NothingToOfferWhenNoScene) {
  Session s("s12", eng2(), services());
  s.start("buy @food@");
  approve(s);
  EXPECT_EQ(s.phase(), Phase::Failed);
  EXPECT_EQ(s.failure()->code, ErrorCode::NothingToObserve);

  auto sold_out = eng2();
  for (auto& item : sold_out.scenes.at("/eng2/2f/subway-front").items) item.quantity = 0;
  Session t("s13", sold_out, services());
  t.start("Go to the Subway and buy @food@.");
  approve(t);
  EXPECT_EQ(t.phase(), Phase::Failed);
  EXPECT_EQ(t.failure()->code, ErrorCode::NothingToOffer);
  EXPECT_EQ(t.failure()->step_index, std::optional<std::size_t>(1));
}

TEST(Session, AmbiguousLocationIsAsked) {
  Session s("s14", eng2(), services());
  s.start("go to the elevator and say hello");
  ASSERT_TRUE(s.handle_event(ev(s, user_event::Approve{})).accepted);
  ASSERT_EQ(s.phase(), Phase::AwaitingFeedback);
  const auto& q = *s.pending_question();
  EXPECT_EQ(q.purpose, Question::Purpose::Location);
  ASSERT_EQ(q.options->options.size(), 2u);
  EXPECT_FALSE(s.handle_event(ev(s, user_event::Select{"/eng2/5f/nowhere"}, qid(s))).accepted);
  ASSERT_TRUE(s.handle_event(ev(s, user_event::Select{"/eng2/7f/elevator-hall"}, qid(s))).accepted);
  s.run_until_blocked();
  EXPECT_EQ(s.phase(), Phase::Done);
  EXPECT_EQ(s.world().robot.at, Location(std::string("/eng2/7f/elevator-hall")));
  EXPECT_EQ(s.script()->steps[0], (CompiledStep{"GoTo", SymbolArg{"/eng2/7f/elevator-hall"}}));
  EXPECT_TRUE(check_trace(s.trace().events()).empty());
}

TEST(Session, FeedbackTimeout) {
  auto now = Clock::time_point{};
  SessionConfig config;
  config.feedback_timeout = std::chrono::seconds(300);
  config.clock = [&] { return now; };
  Session s("s15", eng2(), services(), config);
  s.start("Go to the fridge and give me @drink@.");
  approve(s);
  EXPECT_FALSE(s.check_timeout(now + std::chrono::seconds(299)));
  EXPECT_TRUE(s.check_timeout(now + std::chrono::seconds(300)));
  EXPECT_EQ(s.phase(), Phase::Failed);
  EXPECT_EQ(s.failure()->code, ErrorCode::FeedbackTimeout);
  EXPECT_FALSE(s.check_timeout(now + std::chrono::seconds(900)));
}

TEST(Session, ReusePathSkipsPlanning) {
  ScriptStore store;
  {
    Session first("a", eng2(), services(NoiseConfig{2, 42}, &store));
    first.start("Go to the Subway and buy @food@.");
    approve(first);
    first.handle_event(ev(first, user_event::Select{"Chili Chicken"}, qid(first)));
    first.run_until_blocked();
    ASSERT_EQ(first.phase(), Phase::Done);
  }
  ASSERT_EQ(store.entries().size(), 1u);
  Session again("b", eng2(), services(NoiseConfig{2, 42}, &store));
  again.start("go to the subway and buy @food@");
  EXPECT_TRUE(again.reused());
  EXPECT_EQ(again.phase(), Phase::Executing);
  ASSERT_FALSE(again.trace().events().empty());
  EXPECT_EQ(again.trace().events().front().kind, TraceKind::Reused);
  EXPECT_EQ(again.handle_event(ev(again, user_event::Approve{})).rejection, ErrorCode::WrongPhase);
  again.run_until_blocked();
  again.handle_event(ev(again, user_event::Select{"Chicken Teriyaki"}, qid(again)));
  again.run_until_blocked();
  EXPECT_EQ(again.phase(), Phase::Done);
  EXPECT_EQ(count(again, TraceKind::Planned), 0u);
  EXPECT_EQ(count(again, TraceKind::Approved), 0u);
  // True price is charged; the misread quote is logged beside it.
  const auto* applied = last(again, TraceKind::ActionApplied);
  EXPECT_EQ(applied->payload.at("money_spent"), 560);
  EXPECT_EQ(applied->payload.at("quoted_price"), 650);
}

TEST(Session, DirectExpansionRound) {
  Session s("s16", eng2(), services());
  s.start("Go to the fridge and give me @drink@.");
  EXPECT_THROW(s.variable_expansion_round("drink"), Error);
}

TEST(PhaseNames, RoundTrip) {
  for (auto p : {Phase::Idle, Phase::AwaitingApproval, Phase::Executing, Phase::AwaitingFeedback, Phase::Done,
                 Phase::Failed}) {
    EXPECT_EQ(phase_from_string(to_string(p)), p);
  }
}

}  // namespace
}  // namespace robotask
