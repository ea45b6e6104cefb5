#include "robotask/script_store.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "robotask/error.hpp"

namespace robotask {
namespace {

using testing::catalog;
using testing::eng2;
using testing::TempDir;

struct Compiled {
  Instruction instruction;
  TaskScript script;
};

Compiled compile_text(std::string_view text) {
  auto ins = parse_instruction(text);
  auto script = compile(plan(ins, *catalog()), eng2().locations);
  return {std::move(ins), std::move(script)};
}

TEST(Normalize, SubwayInstruction) {
  // Lowercase, punctuation to spaces, articles dropped, variables kept as tokens.
  EXPECT_EQ(normalize_instruction_text("Go to the Subway and buy @food@."), "go to subway and buy @food@");
  EXPECT_EQ(normalize_instruction_text("Go to the fridge and give me @drink@."),
            "go to fridge and give me @drink@");
}

TEST(Jaccard, SubwayVersusFridgeIsThreeTenths) {
  // {go,to,subway,and,buy,@food@} vs {go,to,fridge,and,give,me,@drink@}: 3 shared of 10.
  const auto a = similarity_tokens(normalize_instruction_text("Go to the Subway and buy @food@"));
  const auto b = similarity_tokens(normalize_instruction_text("Go to the fridge and give me @drink@"));
  EXPECT_DOUBLE_EQ(jaccard(a, b), 0.3);
  EXPECT_DOUBLE_EQ(jaccard({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(jaccard(a, a), 1.0);
}

TEST(ScriptStore, SaveAndFind) {
  ScriptStore store;
  EXPECT_FALSE(store.find_similar("anything", 0.0));
  const auto fridge = compile_text("Go to the fridge and give me @drink@.");
  const auto entry = store.save(fridge.instruction, fridge.script);
  EXPECT_EQ(entry.normalized_text, "go to fridge and give me @drink@");

  const auto exact = store.find_similar("Go to the fridge and give me @drink@.", 0.8);
  ASSERT_TRUE(exact);
  EXPECT_DOUBLE_EQ(exact->score, 1.0);
  EXPECT_EQ(exact->entry.script_id, fridge.script.id);
  EXPECT_FALSE(store.find_similar("Go to the Subway and buy @food@", 0.8));
  // Variable names compare verbatim.
  EXPECT_FALSE(store.find_similar("Go to the fridge and give me @coffee@.", 0.9));

  ASSERT_TRUE(store.script(fridge.script.id));
  EXPECT_EQ(store.script(fridge.script.id)->steps, fridge.script.steps);
}

TEST(ScriptStore, IdenticalTextIsOneEntry) {
  ScriptStore store;
  const auto s = compile_text("Go to the Subway and buy @food@.");
  const auto first = store.save(s.instruction, s.script);
  const auto second = store.save(s.instruction, s.script);
  EXPECT_EQ(store.entries().size(), 1u);
  EXPECT_EQ(first.created_at, second.created_at);
}

TEST(ScriptStore, MismatchedIdsRejected) {
  ScriptStore store;
  const auto s = compile_text("Go to the Subway and buy @food@.");
  const auto other = parse_instruction("buy @food@");
  try {
    store.save(other, s.script);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(ScriptStore, TieGoesToOldestEntry) {
  ScriptStore store;
  const auto a = compile_text("buy @x@ and say hello");
  const auto b = compile_text("buy @x@, say hello");
  store.save(a.instruction, a.script);
  store.save(b.instruction, b.script);
  // Both normalize to the same token set but different strings.
  const auto hit = store.find_similar("say hello and buy @x@", 0.5);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->entry.instruction_text, "buy @x@ and say hello");
}

TEST(ScriptStore, PersistenceRoundTrip) {
  TempDir dir;
  const auto file = dir.path() / "store.jsonl";
  const auto subway = compile_text("Go to the Subway and buy @food@.");
  const auto fridge = compile_text("Go to the fridge and give me @drink@.");
  const std::vector<std::string> queries = {"Go to the Subway and buy @food@", "go to subway, buy @food@",
                                            "Go to the fridge and give me @drink@", "dance"};
  std::vector<std::optional<StoreHit>> before;
  {
    ScriptStore store(file);
    store.save(subway.instruction, subway.script);
    store.save(fridge.instruction, fridge.script);
    store.save(subway.instruction, subway.script);
    for (const auto& q : queries) before.push_back(store.find_similar(q, 0.5));
  }
  ScriptStore reloaded(file);
  ASSERT_EQ(reloaded.entries().size(), 2u);
  EXPECT_EQ(reloaded.entries()[0].instruction_text, subway.instruction.raw_text);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto after = reloaded.find_similar(queries[i], 0.5);
    ASSERT_EQ(after.has_value(), before[i].has_value()) << queries[i];
    if (after) {
      EXPECT_EQ(after->entry.script_id, before[i]->entry.script_id);
      EXPECT_EQ(after->entry.created_at, before[i]->entry.created_at);
      EXPECT_DOUBLE_EQ(after->score, before[i]->score);
      ASSERT_TRUE(reloaded.script(after->entry.script_id));
    }
  }
  EXPECT_EQ(reloaded.script(subway.script.id)->steps, subway.script.steps);

  reloaded.clear();
  EXPECT_TRUE(reloaded.entries().empty());
  EXPECT_TRUE(ScriptStore(file).entries().empty());
}

TEST(ScriptStore, UnwritableFileIsStorageFailure) {
  TempDir dir;
  ScriptStore store(dir.path() / "missing-dir" / "store.jsonl");
  const auto s = compile_text("Go to the Subway and buy @food@.");
  try {
    store.save(s.instruction, s.script);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StorageFailure);
  }
}

TEST(ScriptStore, CorruptFileIsStorageFailure) {
  TempDir dir;
  const auto file = dir.path() / "store.jsonl";
  std::ofstream(file) << "{not json\n";
  EXPECT_THROW(ScriptStore{file}, Error);
}

}  // namespace
}  // namespace robotask
