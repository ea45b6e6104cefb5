#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "robotask/instruction.hpp"
#include "robotask/map_symbol.hpp"

namespace robotask {

enum class SceneKind { MenuBoard, Container, Open };

std::string_view to_string(SceneKind kind);

struct SceneItem {
  std::string name;
  std::optional<std::int64_t> price;  // minor currency units
  std::string description;
  int quantity = 0;
  // Price the mock vision model reads off the scene, when it differs.
  std::optional<std::int64_t> misread_price;

  friend bool operator==(const SceneItem&, const SceneItem&) = default;
};

/// What the camera sees at one map symbol.
struct Scene {
  SceneKind kind = SceneKind::Open;
  std::vector<SceneItem> items;
  bool requires_open = false;

  // Case-insensitive; retried with leading articles stripped ("a Boss").
  const SceneItem* find(std::string_view item_name) const;
  SceneItem* find(std::string_view item_name) {
    return const_cast<SceneItem*>(std::as_const(*this).find(item_name));
  }
  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Either a map symbol name or a free pose.
using Location = std::variant<std::string, Pose>;

std::string describe(const Location& location);

struct Holding {
  std::string item;
  std::string source;  // symbol the item came from
};

struct Delivery {
  std::string item;
  std::string source;
  Pose recipient;
};

struct RobotState {
  Location at;
  std::optional<Holding> holding;
  std::int64_t money_spent = 0;
  // Symbol whose container was opened during the current visit.
  std::optional<std::string> opened;
  std::vector<Delivery> delivered;
  std::vector<std::string> utterances;
};

struct Edge {
  std::string from;
  std::string to;
  double cost = 0.0;  // meters
};

struct ElevatorStop {
  std::string floor;
  std::string symbol;
};

struct ElevatorGroup {
  std::string name;
  std::vector<ElevatorStop> stops;
};

struct WorldModel {
  std::string name;
  std::vector<std::string> floors;
  std::vector<MapSymbol> locations;
  std::vector<Edge> edges;
  std::vector<ElevatorGroup> elevators;
  std::map<std::string, Scene> scenes;
  RobotState robot;
  double elevator_cost = 10.0;

  const MapSymbol* symbol(std::string_view name) const;
  bool has_floor(std::string_view floor) const;
  Pose pose_of(const Location& location) const;
};

enum class LegKind { Walk, ElevatorRide };

std::string_view to_string(LegKind kind);

struct Leg {
  LegKind kind = LegKind::Walk;
  Location from;
  Location to;
  std::string from_floor;
  std::string to_floor;
  double cost = 0.0;
};

struct Path {
  std::vector<Leg> legs;
  double cost = 0.0;
};

/// Throws SchemaViolation or UnreachableFloor.
WorldModel load_world(const nlohmann::json& doc);
WorldModel load_world_file(const std::filesystem::path& path);

/// Minimal-cost route between two locations. Free poses attach to the nearest
/// symbol on their floor. Throws UnknownFloor or NoRoute.
Path plan_route(const WorldModel& world, const Location& from, const Location& to);

/// Routes the robot to `target` and moves it there. Leaving a symbol closes
/// any container opened during the visit.
Path navigate(WorldModel& world, const Location& target);

/// Scene at the robot's symbol. Throws NothingToObserve or ContainerClosed.
Scene observe(const WorldModel& world);

struct Effect {
  std::string verb;
  std::string item;
  std::optional<std::int64_t> price;
  std::string utterance;
  std::optional<Pose> recipient;
};

/// Opens the container scene at the robot's symbol. Throws NothingToObserve
/// when there is no scene there.
Effect open_container(WorldModel& world);

/// Buy, Pick, Pass or Speak. `arg` names the item (Buy/Pick) or the utterance
/// (Speak); it is ignored for Pass. Throws ItemNotPresent, AlreadyHolding,
/// NotHolding, ContainerClosed or InvalidArgument for other verbs.
Effect apply_action(WorldModel& world, std::string_view verb, std::string_view arg);

}  // namespace robotask
