#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "robotask/world.hpp"

namespace robotask {

enum class OutputSchema { ItemPriceDescription, ItemDescription };

std::string_view to_string(OutputSchema schema);

/// Per-function prompt with a single `{}` slot for the variable name.
struct PromptTemplate {
  std::string function;
  std::string text;
  OutputSchema schema = OutputSchema::ItemDescription;
};

class PromptLibrary {
 public:
  /// Buy and Pick templates.
  static PromptLibrary builtin();

  // Throws InvalidArgument unless `text` has exactly one `{}`.
  void add(PromptTemplate tmpl);
  // Throws NoTemplateForFunction.
  const PromptTemplate& lookup(std::string_view function) const;
  std::string build_prompt(std::string_view function, std::string_view var_name) const;

 private:
  std::vector<PromptTemplate> templates_;
};

/// `build_prompt` against the built-in library.
std::string build_prompt(std::string_view function, std::string_view var_name);

/// Hallucination injection: `count` fabricated items, placed by `seed`.
struct NoiseConfig {
  int count = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

struct Distractor {
  std::string name;
  std::optional<std::int64_t> price;
  std::string description;
};

std::vector<Distractor> load_distractors(const nlohmann::json& doc);
std::vector<Distractor> load_distractors_file(const std::filesystem::path& path);

/// Free-text answer of the (mock) vision model.
struct Observation {
  std::string prompt;
  std::vector<std::string> lines;
  std::string source_scene_digest;
  std::vector<std::string> injected;
};

struct OptionItem {
  std::string item;
  std::optional<std::int64_t> price;
  std::string description;

  friend bool operator==(const OptionItem&, const OptionItem&) = default;
};

struct OptionSet {
  std::string question_id;
  std::string variable_name;
  std::vector<OptionItem> options;

  const OptionItem* find(std::string_view item) const;
};

std::string scene_digest(const Scene& scene);

/// "<name> — <price> — <description>"; the price field is empty when absent.
std::string render_observation_line(std::string_view name, std::optional<std::int64_t> price,
                                    std::string_view description);

/// One line per in-stock scene item, with `noise.count` distractors inserted.
/// Throws EmptyScene, or InvalidNoiseConfig when too few distractors remain.
Observation perceive(const Scene& scene, std::string_view prompt, const NoiseConfig& noise,
                     std::span<const Distractor> distractors);

/// Structures an observation. Unreadable names become "unknown"; duplicate
/// names keep the first line; prices are dropped under ItemDescription.
OptionSet format_options(const Observation& observation, OutputSchema schema);

// Replaceable stages: scene+prompt -> free text, free text -> options.
class VisionModel {
 public:
  virtual ~VisionModel() = default;
  virtual Observation describe(const Scene& scene, std::string_view prompt) = 0;
};

class OptionFormatter {
 public:
  virtual ~OptionFormatter() = default;
  virtual OptionSet format(const Observation& observation, OutputSchema schema) = 0;
};

class MockVisionModel : public VisionModel {
 public:
  MockVisionModel(NoiseConfig noise, std::vector<Distractor> distractors);
  Observation describe(const Scene& scene, std::string_view prompt) override;

 private:
  NoiseConfig noise_;
  std::vector<Distractor> distractors_;
};

class RuleFormatter : public OptionFormatter {
 public:
  OptionSet format(const Observation& observation, OutputSchema schema) override {
    return format_options(observation, schema);
  }
};

}  // namespace robotask
