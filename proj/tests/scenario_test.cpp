#include "robotask/gateway/scenario.hpp"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "robotask/error.hpp"

namespace robotask::gateway {
namespace {

using nlohmann::json;
using testing::data_dir;
using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario bundled(const std::string& name) { return load_scenario(data_dir() / "scenarios" / (name + ".scenario")); }

TEST(Scenario, LoadsBundledFiles) {
  const auto s = bundled("fridge");
  EXPECT_EQ(s.name, "fridge");
  EXPECT_EQ(s.instruction, "Go to the fridge and give me @drink@.");
  EXPECT_EQ(s.responses.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(s.world));
  EXPECT_EQ(bundled("subway").noise, (NoiseConfig{2, 42}));
}

TEST(Scenario, SubwayDone) {
  const auto r = run_scenario(bundled("subway"));
  EXPECT_TRUE(r.ok) << r.summary();
  EXPECT_EQ(r.phase, Phase::Done);
  EXPECT_EQ(std::get<ItemValue>(r.bindings.at("food")).name, "Chili Chicken");
}

TEST(Scenario, FridgeDone) {
  const auto r = run_scenario(bundled("fridge"));
  EXPECT_TRUE(r.ok) << r.summary();
  EXPECT_EQ(std::get<ItemValue>(r.bindings.at("drink")).name, "Georgia");
}

TEST(Scenario, ParmesanFails) {
  const auto r = run_scenario(bundled("subway_parmesan"));
  EXPECT_TRUE(r.ok) << r.summary();
  EXPECT_EQ(r.failure->code, ErrorCode::ItemNotPresent);
}

TEST(Scenario, NoiseOverrideChangesOutcome) {
  RunOptions opts;
  opts.noise = NoiseConfig{0, 0};
  const auto r = run_scenario(bundled("subway_parmesan"), opts);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.rejections.empty());
}

TEST(Scenario, LeftoverResponsesAreAMismatch) {
  auto s = bundled("subway");
  s.responses.push_back(user_event::Cancel{});
  const auto r = run_scenario(s);
  EXPECT_EQ(r.phase, Phase::Done);
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.summary().find("left over"), std::string::npos);
}

TEST(Scenario, MissingResponsesAreAMismatch) {
  auto s = bundled("fridge");
  s.responses.pop_back();
  const auto r = run_scenario(s);
  EXPECT_FALSE(r.ok);
  EXPECT_EQ(r.phase, Phase::AwaitingFeedback);
}

TEST(Scenario, ExpectationMismatchIsReported) {
  auto s = bundled("subway");
  s.expect.bindings["food"] = ItemValue{"Chicken Teriyaki", std::nullopt, ""};
  const auto r = run_scenario(s);
  EXPECT_FALSE(r.ok);
  EXPECT_NE(r.summary().find("Chicken Teriyaki"), std::string::npos);
}

TEST(Scenario, TranscriptsAreDeterministic) {
  TempDir dir;
  for (const std::string name : {"subway", "fridge", "subway_parmesan"}) {
    RunOptions a, b;
    a.transcript = dir.path() / (name + "-a.jsonl");
    b.transcript = dir.path() / (name + "-b.jsonl");
    run_scenario(bundled(name), a);
    run_scenario(bundled(name), b);
    const auto ta = slurp(*a.transcript);
    EXPECT_FALSE(ta.empty());
    EXPECT_EQ(ta, slurp(*b.transcript)) << name;
  }
}

TEST(Scenario, ReuseAgainstPersistedStore) {
  TempDir dir;
  RunOptions opts;
  opts.store = dir.path() / "store.jsonl";
  const auto first = run_scenario(bundled("subway"), opts);
  ASSERT_TRUE(first.ok) << first.summary();
  EXPECT_FALSE(first.reused);
  const auto second = run_scenario(bundled("subway"), opts);
  EXPECT_TRUE(second.ok) << second.summary();
  EXPECT_TRUE(second.reused);
  EXPECT_EQ(second.trace.front().kind, TraceKind::Reused);
}

TEST(Scenario, SchemaErrors) {
  EXPECT_THROW(parse_scenario(json{{"version", 1}}, {}), Error);
  json doc = {{"version", 1},
              {"world", "w.json"},
              {"catalog", "c.json"},
              {"instruction", "x"},
              {"responses", {{{"type", "Dance"}}}},
              {"expect", {{"phase", "Done"}}}};
  EXPECT_THROW(parse_scenario(doc, {}), Error);
  doc["responses"] = json::array();
  doc["expect"]["phase"] = "Finished";
  EXPECT_THROW(parse_scenario(doc, {}), Error);
  doc["expect"]["phase"] = "Done";
  EXPECT_EQ(parse_scenario(doc, "/base").world, std::filesystem::path("/base/w.json"));
}

}  // namespace
}  // namespace robotask::gateway
