#include "robotask/perception.hpp"

#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "robotask/error.hpp"

namespace robotask {
namespace {

using testing::distractors;
using testing::eng2;

const Scene& subway() { return eng2().scenes.at("/eng2/2f/subway-front"); }
const Scene& fridge() { return eng2().scenes.at("/eng2/7f/room73B2-fridge-front"); }

std::vector<std::string> names(const OptionSet& set) {
  std::vector<std::string> out;
  for (const auto& o : set.options) out.push_back(o.item);
  return out;
}

// Reference model of the injection scheme: k offsets first (offset i drawn
// over the list length at that point), then k distractors by partial
// Fisher-Yates over the fixture minus visible names.
std::vector<std::string> reference_injection(const std::vector<std::string>& visible, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> offsets;
  for (int i = 0; i < k; ++i) offsets.push_back(rng() % (visible.size() + i + 1));
  std::vector<std::string> pool;
  for (const auto& d : distractors()) {
    if (std::find(visible.begin(), visible.end(), d.name) == visible.end()) pool.push_back(d.name);
  }
  for (int i = 0; i < k; ++i) {
    const std::size_t j = i + rng() % (pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  auto out = visible;
  for (int i = 0; i < k; ++i) out.insert(out.begin() + static_cast<std::ptrdiff_t>(offsets[i]), pool[i]);
  return out;
}

TEST(BuildPrompt, Templates) {
  EXPECT_EQ(build_prompt("Pick", "drink"), "Please list drink with detailed information with name and description");
  EXPECT_EQ(build_prompt("Buy", "food"), "Please list food for sale with name, price and description.");
  try {
    build_prompt("Pass", "x");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoTemplateForFunction);
  }
}

TEST(BuildPrompt, PickTemplateHoldsVariableOnce) {
  const std::string tmpl = "Please list {} with detailed information with name and description";
  for (const std::string v : {"drink", "x", "snack_2"}) {
    const auto p = build_prompt("Pick", v);
    const auto at = tmpl.find("{}");
    EXPECT_EQ(p, tmpl.substr(0, at) + v + tmpl.substr(at + 2));
  }
  const auto& lib = PromptLibrary::builtin();
  EXPECT_EQ(lib.lookup("Buy").schema, OutputSchema::ItemPriceDescription);
  EXPECT_EQ(lib.lookup("Pick").schema, OutputSchema::ItemDescription);
}

TEST(Perceive, FridgeWithoutNoise) {
  const auto obs = perceive(fridge(), "p", NoiseConfig{}, distractors());
  ASSERT_EQ(obs.lines.size(), 3u);
  EXPECT_EQ(obs.lines[1], "Georgia — — Georgia Emerald Mountain Blend, canned coffee");
  EXPECT_TRUE(obs.injected.empty());
  EXPECT_EQ(obs.source_scene_digest, scene_digest(fridge()));
  EXPECT_EQ(obs.prompt, "p");
}

TEST(Perceive, SubwaySeed42InjectsParmesanAndSpicyItalian) {
  const auto obs = perceive(subway(), "p", NoiseConfig{2, 42}, distractors());
  ASSERT_EQ(obs.lines.size(), 4u);
  const auto options = format_options(obs, OutputSchema::ItemPriceDescription);
  const std::vector<std::string> expected = {"Parmesan", "Spicy Italian", "Chili Chicken", "Chicken Teriyaki"};
  EXPECT_EQ(names(options), expected);
  EXPECT_EQ(names(options), reference_injection({"Chili Chicken", "Chicken Teriyaki"}, 2, 42));
  std::vector<std::string> injected = obs.injected;
  std::sort(injected.begin(), injected.end());
  EXPECT_EQ(injected, (std::vector<std::string>{"Parmesan", "Spicy Italian"}));
}

TEST(Perceive, InjectionMatchesReferenceModel) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (int k = 0; k <= 3; ++k) {
      const auto obs = perceive(subway(), "p", NoiseConfig{k, seed}, distractors());
      const auto options = format_options(obs, OutputSchema::ItemPriceDescription);
      ASSERT_EQ(names(options), reference_injection({"Chili Chicken", "Chicken Teriyaki"}, k, seed))
          << "seed " << seed << " k " << k;
      ASSERT_EQ(options.options.size(), 2u + static_cast<std::size_t>(k));
      for (const auto& name : obs.injected) {
        EXPECT_EQ(subway().find(name), nullptr);
      }
      for (const auto& o : options.options) {
        const bool injected = std::find(obs.injected.begin(), obs.injected.end(), o.item) != obs.injected.end();
        EXPECT_NE(injected, subway().find(o.item) != nullptr);
      }
    }
  }
}

TEST(Perceive, Deterministic) {
  const auto a = format_options(perceive(subway(), "p", NoiseConfig{3, 9}, distractors()),
                                OutputSchema::ItemPriceDescription);
  const auto b = format_options(perceive(subway(), "p", NoiseConfig{3, 9}, distractors()),
                                OutputSchema::ItemPriceDescription);
  EXPECT_EQ(a.options, b.options);
}

TEST(Perceive, Errors) {
  Scene empty;
  try {
    perceive(empty, "p", NoiseConfig{}, distractors());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyScene);
  }
  Scene sold_out = subway();
  for (auto& item : sold_out.items) item.quantity = 0;
  EXPECT_THROW(perceive(sold_out, "p", NoiseConfig{}, distractors()), Error);
  try {
    perceive(subway(), "p", NoiseConfig{9, 1}, distractors());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidNoiseConfig);
  }
}

TEST(Perceive, SoundWithoutNoise) {
  for (const auto& [symbol, scene] : eng2().scenes) {
    const auto options = format_options(perceive(scene, "p", NoiseConfig{}, distractors()),
                                        OutputSchema::ItemPriceDescription);
    ASSERT_EQ(options.options.size(), scene.items.size());
    for (std::size_t i = 0; i < scene.items.size(); ++i) {
      EXPECT_EQ(options.options[i].item, scene.items[i].name);
    }
  }
}

TEST(Perceive, MisreadPriceIsReported) {
  const auto options = format_options(perceive(subway(), "p", NoiseConfig{}, distractors()),
                                      OutputSchema::ItemPriceDescription);
  EXPECT_EQ(options.find("Chili Chicken")->price, subway().find("Chili Chicken")->price);
  EXPECT_NE(options.find("Chicken Teriyaki")->price, subway().find("Chicken Teriyaki")->price);
}

TEST(FormatOptions, SchemasUnknownAndDuplicates) {
  Observation obs;
  obs.lines = {"Boss — 120 — canned", "??? — — ", "Boss — 130 — again", "Wonda — — morning"};
  const auto with_price = format_options(obs, OutputSchema::ItemPriceDescription);
  ASSERT_EQ(names(with_price), (std::vector<std::string>{"Boss", "unknown", "Wonda"}));
  EXPECT_EQ(with_price.options[0].price, std::optional<std::int64_t>(120));
  EXPECT_EQ(with_price.options[0].description, "canned");
  const auto without = format_options(obs, OutputSchema::ItemDescription);
  EXPECT_FALSE(without.options[0].price);
}

TEST(RenderObservationLine, Format) {
  EXPECT_EQ(render_observation_line("Cola", 160, "can"), "Cola — 160 — can");
  EXPECT_EQ(render_observation_line("Boss", std::nullopt, "coffee"), "Boss — — coffee");
}

TEST(LoadDistractors, Fixture) {
  ASSERT_EQ(distractors().size(), 8u);
  EXPECT_EQ(distractors()[2].name, "Spicy Italian");
  EXPECT_EQ(distractors()[5].name, "Parmesan");
  EXPECT_THROW(load_distractors(nlohmann::json{{"version", 1}}), Error);
}

}  // namespace
}  // namespace robotask
