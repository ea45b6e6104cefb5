#pragma once

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <string>

#include "robotask/executor.hpp"
#include "robotask/perception.hpp"
#include "robotask/planner.hpp"
#include "robotask/world.hpp"

namespace robotask::testing {

inline std::filesystem::path data_dir() { return ROBOTASK_DATA_DIR; }

inline const WorldModel& eng2() {
  static const WorldModel world = load_world_file(data_dir() / "worlds/eng2.json");
  return world;
}

inline std::shared_ptr<const PlanCatalog> catalog() {
  static const auto c = std::make_shared<const PlanCatalog>(load_catalog_file(data_dir() / "catalog.json"));
  return c;
}

inline const std::vector<Distractor>& distractors() {
  static const auto d = load_distractors_file(data_dir() / "distractors.json");
  return d;
}

inline SessionServices services(NoiseConfig noise = {}, ScriptStore* store = nullptr) {
  SessionServices s;
  s.planner = std::make_shared<CatalogPlanner>(catalog());
  s.verbs = catalog()->verbs;
  s.vision = std::make_shared<MockVisionModel>(noise, distractors());
  s.store = store;
  return s;
}

// Fresh temporary directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("robotask-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace robotask::testing
