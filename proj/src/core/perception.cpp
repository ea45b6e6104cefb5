#include "robotask/perception.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>

#include "robotask/error.hpp"
#include "robotask/planner.hpp"
#include "robotask/text.hpp"

namespace robotask {

namespace {

constexpr std::string_view kDash = "\xE2\x80\x94";  // U+2014
constexpr std::string_view kSlot = "{}";

std::size_t count_slots(std::string_view s) {
  std::size_t n = 0;
  for (auto pos = s.find(kSlot); pos != std::string_view::npos; pos = s.find(kSlot, pos + kSlot.size())) {
    ++n;
  }
  return n;
}

std::vector<std::string> split_on_dash(std::string_view line) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (auto pos = line.find(kDash); pos != std::string_view::npos; pos = line.find(kDash, start)) {
    parts.emplace_back(text::trim(line.substr(start, pos - start)));
    start = pos + kDash.size();
  }
  parts.emplace_back(text::trim(line.substr(start)));
  return parts;
}

bool readable_name(std::string_view name) {
  return std::any_of(name.begin(), name.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; });
}

std::optional<std::int64_t> parse_price(std::string_view s) {
  if (s.empty() || s.size() > 15 ||
      !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
    return std::nullopt;
  }
  return std::stoll(std::string(s));
}

}  // namespace

std::string_view to_string(OutputSchema schema) {
  return schema == OutputSchema::ItemPriceDescription ? "ItemPriceDescription" : "ItemDescription";
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  lib.add({std::string(verbs::kBuy), "Please list {} for sale with name, price and description.",
           OutputSchema::ItemPriceDescription});
  lib.add({std::string(verbs::kPick), "Please list {} with detailed information with name and description",
           OutputSchema::ItemDescription});
  return lib;
}

void PromptLibrary::add(PromptTemplate tmpl) {
  if (count_slots(tmpl.text) != 1) {
    throw Error(ErrorCode::InvalidArgument, "prompt template needs exactly one {} slot: " + tmpl.text);
  }
  auto it = std::find_if(templates_.begin(), templates_.end(),
                         [&](const PromptTemplate& t) { return text::iequals(t.function, tmpl.function); });
  if (it != templates_.end()) {
    *it = std::move(tmpl);
  } else {
    templates_.push_back(std::move(tmpl));
  }
}

const PromptTemplate& PromptLibrary::lookup(std::string_view function) const {
  for (const auto& t : templates_) {
    if (text::iequals(t.function, function)) {
      return t;
    }
  }
  throw Error(ErrorCode::NoTemplateForFunction, std::string(function));
}

std::string PromptLibrary::build_prompt(std::string_view function, std::string_view var_name) const {
  std::string out = lookup(function).text;
  out.replace(out.find(kSlot), kSlot.size(), var_name);
  return out;
}

std::string build_prompt(std::string_view function, std::string_view var_name) {
  static const PromptLibrary library = PromptLibrary::builtin();
  return library.build_prompt(function, var_name);
}

std::vector<Distractor> load_distractors(const nlohmann::json& doc) {
  std::vector<Distractor> out;
  try {
    if (!doc.is_object() || doc.value("version", 0) != 1) {
      throw Error(ErrorCode::SchemaViolation, "distractors: expected an object with version 1");
    }
    for (const auto& d : doc.at("distractors")) {
      Distractor item;
      item.name = d.at("name").get<std::string>();
      if (d.contains("price") && !d.at("price").is_null()) {
        item.price = d.at("price").get<std::int64_t>();
      }
      item.description = d.value("description", "");
      out.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, std::string("distractors: ") + e.what());
  }
  return out;
}

std::vector<Distractor> load_distractors_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::SchemaViolation, "cannot open distractors " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
  return load_distractors(doc);
}

const OptionItem* OptionSet::find(std::string_view item) const {
  for (const auto& o : options) {
    if (o.item == item) {
      return &o;
    }
  }
  for (const auto& o : options) {
    if (text::iequals(o.item, item)) {
      return &o;
    }
  }
  return nullptr;
}

std::string scene_digest(const Scene& scene) {
  std::string canonical(to_string(scene.kind));
  canonical += scene.requires_open ? "|open" : "|free";
  for (const auto& item : scene.items) {
    canonical += '|';
    canonical += item.name;
    canonical += ':';
    canonical += item.price ? std::to_string(*item.price) : "-";
    canonical += ':';
    canonical += item.description;
    canonical += ':';
    canonical += std::to_string(item.quantity);
  }
  return text::hex64(text::fnv1a64(canonical));
}

std::string render_observation_line(std::string_view name, std::optional<std::int64_t> price,
                                    std::string_view description) {
  std::string line(name);
  line += ' ';
  line += kDash;
  line += ' ';
  if (price) {
    line += std::to_string(*price);
    line += ' ';
  }
  line += kDash;
  line += ' ';
  line += description;
  return line;
}

Observation perceive(const Scene& scene, std::string_view prompt, const NoiseConfig& noise,
                     std::span<const Distractor> distractors) {
  std::vector<std::string> lines;
  for (const auto& item : scene.items) {
    if (item.quantity >= 1) {
      lines.push_back(render_observation_line(item.name, item.misread_price ? item.misread_price : item.price, item.description));
    }
  }
  if (lines.empty()) {
    throw Error(ErrorCode::EmptyScene, "no visible items");
  }

  Observation obs;
  obs.prompt = std::string(prompt);
  obs.source_scene_digest = scene_digest(scene);

  if (noise.count > 0) {
    std::vector<const Distractor*> pool;
    for (const auto& d : distractors) {
      const bool visible = std::any_of(scene.items.begin(), scene.items.end(), [&](const SceneItem& s) {
        return s.quantity >= 1 && text::iequals(s.name, d.name);
      });
      if (!visible) {
        pool.push_back(&d);
      }
    }
    const auto k = static_cast<std::size_t>(noise.count);
    if (k > pool.size()) {
      throw Error(ErrorCode::InvalidNoiseConfig,
                  "asked for " + std::to_string(k) + " distractors, " + std::to_string(pool.size()) + " available");
    }
    // mt19937_64's output sequence is fixed by the standard; reduce with %
    // rather than a distribution so results match across standard libraries.
    std::mt19937_64 rng(noise.seed);
    std::vector<std::size_t> offsets(k);
    for (std::size_t i = 0; i < k; ++i) {
      offsets[i] = static_cast<std::size_t>(rng() % (lines.size() + i + 1));
    }
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    for (std::size_t i = 0; i < k; ++i) {
      const auto* d = pool[i];
      lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                   render_observation_line(d->name, d->price, d->description));
      obs.injected.push_back(d->name);
    }
  }
  obs.lines = std::move(lines);
  return obs;
}

OptionSet format_options(const Observation& observation, OutputSchema schema) {
  OptionSet out;
  for (const auto& line : observation.lines) {
    const auto parts = split_on_dash(line);
    OptionItem item;
    item.item = readable_name(parts[0]) ? parts[0] : "unknown";
    if (parts.size() >= 3) {
      if (schema == OutputSchema::ItemPriceDescription) {
        item.price = parse_price(parts[1]);
      }
      std::vector<std::string> rest(parts.begin() + 2, parts.end());
      item.description = text::join(rest, " " + std::string(kDash) + " ");
    } else if (parts.size() == 2) {
      item.description = parts[1];
    }
    const bool duplicate = std::any_of(out.options.begin(), out.options.end(),
                                       [&](const OptionItem& o) { return o.item == item.item; });
    if (!duplicate) {
      out.options.push_back(std::move(item));
    }
  }
  return out;
}

MockVisionModel::MockVisionModel(NoiseConfig noise, std::vector<Distractor> distractors)
    : noise_(noise), distractors_(std::move(distractors)) {}

Observation MockVisionModel::describe(const Scene& scene, std::string_view prompt) {
  return perceive(scene, prompt, noise_, distractors_);
}

}  // namespace robotask
