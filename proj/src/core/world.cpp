#include "robotask/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

#include "robotask/error.hpp"
#include "robotask/planner.hpp"
#include "robotask/text.hpp"

namespace robotask {

namespace {

[[noreturn]] void schema_fail(const std::string& why) {
  throw Error(ErrorCode::SchemaViolation, why);
}

double distance(double ax, double ay, double bx, double by) { return std::hypot(ax - bx, ay - by); }

std::string strip_leading_articles(std::string_view s) {
  auto words = text::split_whitespace(s);
  std::size_t i = 0;
  while (i + 1 < words.size() && text::is_article(text::to_lower(words[i]))) {
    ++i;
  }
  return text::join(std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(i), words.end()), " ");
}

Pose parse_pose(const nlohmann::json& j) {
  Pose p;
  p.x = j.at("x").get<double>();
  p.y = j.at("y").get<double>();
  p.floor = j.at("floor").get<std::string>();
  p.yaw = j.value("yaw", 0.0);
  return p;
}

SceneKind parse_scene_kind(const std::string& s) {
  if (s == "MenuBoard") return SceneKind::MenuBoard;
  if (s == "Container") return SceneKind::Container;
  if (s == "Open") return SceneKind::Open;
  schema_fail("unknown scene kind " + s);
}

// Graph node ids: [0, n) are symbols; n is a free source, n+1 a free target.
struct Arc {
  std::size_t to;
  double cost;
  LegKind kind;
};

std::size_t nearest_symbol(const WorldModel& world, const Pose& pose) {
  if (!world.has_floor(pose.floor)) {
    throw Error(ErrorCode::UnknownFloor, pose.floor);
  }
  std::size_t best = world.locations.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < world.locations.size(); ++i) {
    const auto& s = world.locations[i];
    if (s.floor != pose.floor) {
      continue;
    }
    const double d = distance(s.x, s.y, pose.x, pose.y);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  if (best == world.locations.size()) {
    throw Error(ErrorCode::NoRoute, "no map symbol on floor " + pose.floor);
  }
  return best;
}

std::size_t symbol_index(const WorldModel& world, const std::string& name) {
  for (std::size_t i = 0; i < world.locations.size(); ++i) {
    if (world.locations[i].name == name) {
      return i;
    }
  }
  throw Error(ErrorCode::NoRoute, "unknown symbol " + name);
}

}  // namespace

std::string_view to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::MenuBoard:
      return "MenuBoard";
    case SceneKind::Container:
      return "Container";
    case SceneKind::Open:
      return "Open";
  }
  return "Open";
}

std::string_view to_string(LegKind kind) { return kind == LegKind::Walk ? "Walk" : "ElevatorRide"; }

const SceneItem* Scene::find(std::string_view item_name) const {
  for (const auto& item : items) {
    if (text::iequals(item.name, item_name)) {
      return &item;
    }
  }
  const std::string stripped = strip_leading_articles(item_name);
  for (const auto& item : items) {
    if (text::iequals(item.name, stripped)) {
      return &item;
    }
  }
  return nullptr;
}

std::string describe(const Location& location) {
  if (const auto* s = std::get_if<std::string>(&location)) {
    return *s;
  }
  return render_value(std::get<Pose>(location));
}

const MapSymbol* WorldModel::symbol(std::string_view name) const {
  for (const auto& s : locations) {
    if (s.name == name) {
      return &s;
    }
  }
  return nullptr;
}

bool WorldModel::has_floor(std::string_view floor) const {
  return std::find(floors.begin(), floors.end(), floor) != floors.end();
}

Pose WorldModel::pose_of(const Location& location) const {
  if (const auto* p = std::get_if<Pose>(&location)) {
    return *p;
  }
  const auto* s = symbol(std::get<std::string>(location));
  if (s == nullptr) {
    throw Error(ErrorCode::NoRoute, "unknown symbol " + std::get<std::string>(location));
  }
  return Pose{s->x, s->y, s->floor, 0.0};
}

WorldModel load_world(const nlohmann::json& doc) {
  WorldModel world;
  try {
    if (!doc.is_object() || doc.value("version", 0) != 1) {
      schema_fail("world: expected an object with version 1");
    }
    world.name = doc.value("name", "");
    world.elevator_cost = doc.value("elevator_cost", 10.0);
    if (world.elevator_cost < 0) {
      schema_fail("elevator_cost must be non-negative");
    }
    world.floors = doc.at("floors").get<std::vector<std::string>>();
    if (world.floors.empty()) {
      schema_fail("floors must be non-empty");
    }
    if (std::set<std::string>(world.floors.begin(), world.floors.end()).size() != world.floors.size()) {
      schema_fail("duplicate floor id");
    }

    const auto& locations = doc.at("locations");
    if (!locations.is_array() || locations.empty()) {
      schema_fail("locations must be a non-empty array");
    }
    std::set<std::string> names;
    for (const auto& l : locations) {
      MapSymbol s;
      s.name = l.at("name").get<std::string>();
      s.floor = l.at("floor").get<std::string>();
      s.x = l.at("x").get<double>();
      s.y = l.at("y").get<double>();
      for (const auto& a : l.at("aliases")) {
        auto norm = normalize_location_phrase(a.get<std::string>());
        if (!norm.empty()) {
          s.aliases.push_back(std::move(norm));
        }
      }
      if (s.name.empty() || !names.insert(s.name).second) {
        schema_fail("location name empty or duplicated: " + s.name);
      }
      if (!world.has_floor(s.floor)) {
        schema_fail("location " + s.name + " on unknown floor " + s.floor);
      }
      if (s.aliases.empty()) {
        schema_fail("location " + s.name + " has no aliases");
      }
      world.locations.push_back(std::move(s));
    }

    for (const auto& e : doc.value("edges", nlohmann::json::array())) {
      Edge edge;
      edge.from = e.at("from").get<std::string>();
      edge.to = e.at("to").get<std::string>();
      const auto* a = world.symbol(edge.from);
      const auto* b = world.symbol(edge.to);
      if (a == nullptr || b == nullptr) {
        schema_fail("edge endpoint unknown: " + edge.from + " - " + edge.to);
      }
      if (a->floor != b->floor) {
        schema_fail("edge crosses floors: " + edge.from + " - " + edge.to);
      }
      edge.cost = e.contains("cost") ? e.at("cost").get<double>() : distance(a->x, a->y, b->x, b->y);
      if (edge.cost < 0) {
        schema_fail("negative edge cost");
      }
      world.edges.push_back(std::move(edge));
    }

    for (const auto& g : doc.value("elevators", nlohmann::json::array())) {
      ElevatorGroup group;
      group.name = g.value("name", "");
      for (const auto& stop : g.at("stops")) {
        ElevatorStop st{stop.at("floor").get<std::string>(), stop.at("symbol").get<std::string>()};
        const auto* s = world.symbol(st.symbol);
        if (s == nullptr || s->floor != st.floor) {
          schema_fail("elevator stop " + st.symbol + " is not a symbol on floor " + st.floor);
        }
        group.stops.push_back(std::move(st));
      }
      world.elevators.push_back(std::move(group));
    }

    const auto scenes = doc.value("scenes", nlohmann::json::object());
    for (const auto& [key, sj] : scenes.items()) {
      if (world.symbol(key) == nullptr) {
        schema_fail("scene key is not a symbol: " + key);
      }
      Scene scene;
      scene.kind = parse_scene_kind(sj.at("kind").get<std::string>());
      scene.requires_open = sj.value("requires_open", false);
      std::set<std::string> item_names;
      for (const auto& ij : sj.value("items", nlohmann::json::array())) {
        SceneItem item;
        item.name = ij.at("name").get<std::string>();
        if (ij.contains("price") && !ij.at("price").is_null()) {
          item.price = ij.at("price").get<std::int64_t>();
        }
        item.description = ij.value("description", "");
        item.quantity = ij.value("quantity", 1);
        if (ij.contains("misread_price") && !ij.at("misread_price").is_null()) {
          item.misread_price = ij.at("misread_price").get<std::int64_t>();
        }
        if (item.name.empty() || !item_names.insert(text::to_lower(item.name)).second) {
          schema_fail("scene " + key + ": empty or duplicate item " + item.name);
        }
        if (item.quantity < 0) {
          schema_fail("scene " + key + ": negative quantity for " + item.name);
        }
        if (scene.kind == SceneKind::MenuBoard && !item.price) {
          schema_fail("scene " + key + ": menu item without price " + item.name);
        }
        scene.items.push_back(std::move(item));
      }
      world.scenes.emplace(key, std::move(scene));
    }

    if (doc.contains("robot")) {
      const auto& at = doc.at("robot").at("at");
      if (at.is_string()) {
        if (world.symbol(at.get<std::string>()) == nullptr) {
          schema_fail("robot starts at unknown symbol");
        }
        world.robot.at = at.get<std::string>();
      } else {
        auto pose = parse_pose(at);
        if (!world.has_floor(pose.floor)) {
          schema_fail("robot starts on unknown floor");
        }
        world.robot.at = pose;
      }
    } else {
      world.robot.at = world.locations.front().name;
    }
  } catch (const nlohmann::json::exception& e) {
    schema_fail(std::string("world: ") + e.what());
  }

  // Every floor that has locations must be reachable from every other one.
  std::vector<std::string> used_floors;
  for (const auto& f : world.floors) {
    if (std::any_of(world.locations.begin(), world.locations.end(),
                    [&](const MapSymbol& s) { return s.floor == f; })) {
      used_floors.push_back(f);
    }
  }
  std::vector<std::size_t> parent(used_floors.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      i = parent[i] = parent[parent[i]];
    }
    return i;
  };
  const auto index_of = [&](const std::string& f) {
    return static_cast<std::size_t>(std::find(used_floors.begin(), used_floors.end(), f) - used_floors.begin());
  };
  for (const auto& g : world.elevators) {
    for (std::size_t i = 1; i < g.stops.size(); ++i) {
      parent[find(index_of(g.stops[i].floor))] = find(index_of(g.stops[0].floor));
    }
  }
  for (std::size_t i = 1; i < used_floors.size(); ++i) {
    if (find(i) != find(0)) {
      throw Error(ErrorCode::UnreachableFloor, used_floors[i]);
    }
  }
  return world;
}

WorldModel load_world_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::SchemaViolation, "cannot open world " + path.string());
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
  return load_world(doc);
}

Path plan_route(const WorldModel& world, const Location& from, const Location& to) {
  if (from == to) {
    return {};
  }
  const std::size_t n = world.locations.size();
  const std::size_t source = n;
  const std::size_t target = n + 1;
  std::vector<std::vector<Arc>> adj(n + 2);

  for (const auto& e : world.edges) {
    const auto a = symbol_index(world, e.from);
    const auto b = symbol_index(world, e.to);
    adj[a].push_back({b, e.cost, LegKind::Walk});
    adj[b].push_back({a, e.cost, LegKind::Walk});
  }
  for (const auto& g : world.elevators) {
    for (const auto& s1 : g.stops) {
      for (const auto& s2 : g.stops) {
        if (s1.floor != s2.floor) {
          adj[symbol_index(world, s1.symbol)].push_back(
              {symbol_index(world, s2.symbol), world.elevator_cost, LegKind::ElevatorRide});
        }
      }
    }
  }

  std::size_t start = 0;
  if (const auto* name = std::get_if<std::string>(&from)) {
    start = symbol_index(world, *name);
  } else {
    const auto& pose = std::get<Pose>(from);
    const auto anchor = nearest_symbol(world, pose);
    const auto& s = world.locations[anchor];
    adj[source].push_back({anchor, distance(s.x, s.y, pose.x, pose.y), LegKind::Walk});
    start = source;
  }
  std::size_t goal = 0;
  if (const auto* name = std::get_if<std::string>(&to)) {
    goal = symbol_index(world, *name);
  } else {
    const auto& pose = std::get<Pose>(to);
    const auto anchor = nearest_symbol(world, pose);
    const auto& s = world.locations[anchor];
    adj[anchor].push_back({target, distance(s.x, s.y, pose.x, pose.y), LegKind::Walk});
    goal = target;
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n + 2, kInf);
  std::vector<std::size_t> prev(n + 2, n + 2);
  std::vector<LegKind> via(n + 2, LegKind::Walk);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[start] = 0.0;
  queue.emplace(0.0, start);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) {
      continue;
    }
    if (u == goal) {
      break;
    }
    for (const auto& arc : adj[u]) {
      const double nd = d + arc.cost;
      if (nd < dist[arc.to]) {
        dist[arc.to] = nd;
        prev[arc.to] = u;
        via[arc.to] = arc.kind;
        queue.emplace(nd, arc.to);
      }
    }
  }
  if (dist[goal] == kInf) {
    throw Error(ErrorCode::NoRoute, describe(from) + " -> " + describe(to));
  }

  const auto location_of = [&](std::size_t node) -> Location {
    if (node == source) return from;
    if (node == target) return to;
    return world.locations[node].name;
  };
  Path path;
  path.cost = dist[goal];
  for (std::size_t v = goal; v != start; v = prev[v]) {
    const std::size_t u = prev[v];
    Leg leg;
    leg.kind = via[v];
    leg.from = location_of(u);
    leg.to = location_of(v);
    leg.from_floor = world.pose_of(leg.from).floor;
    leg.to_floor = world.pose_of(leg.to).floor;
    leg.cost = dist[v] - dist[u];
    path.legs.push_back(std::move(leg));
  }
  std::reverse(path.legs.begin(), path.legs.end());
  return path;
}

Path navigate(WorldModel& world, const Location& target) {
  Path path = plan_route(world, world.robot.at, target);
  if (!path.legs.empty()) {
    world.robot.opened.reset();
  }
  world.robot.at = target;
  return path;
}

Scene observe(const WorldModel& world) {
  const auto* name = std::get_if<std::string>(&world.robot.at);
  if (name == nullptr) {
    throw Error(ErrorCode::NothingToObserve, "robot is at a free pose");
  }
  auto it = world.scenes.find(*name);
  if (it == world.scenes.end()) {
    throw Error(ErrorCode::NothingToObserve, *name);
  }
  if (it->second.requires_open && world.robot.opened != *name) {
    throw Error(ErrorCode::ContainerClosed, *name);
  }
  return it->second;
}

Effect open_container(WorldModel& world) {
  const auto* name = std::get_if<std::string>(&world.robot.at);
  if (name == nullptr || world.scenes.count(*name) == 0) {
    throw Error(ErrorCode::NothingToObserve, "nothing to open at " + describe(world.robot.at));
  }
  world.robot.opened = *name;
  return Effect{std::string(verbs::kOpen), *name, std::nullopt, {}, std::nullopt};
}

Effect apply_action(WorldModel& world, std::string_view verb, std::string_view arg) {
  auto& robot = world.robot;
  if (verb == verbs::kBuy || verb == verbs::kPick) {
    if (robot.holding) {
      throw Error(ErrorCode::AlreadyHolding, robot.holding->item);
    }
    const auto* name = std::get_if<std::string>(&robot.at);
    auto scene = name ? world.scenes.find(*name) : world.scenes.end();
    if (scene == world.scenes.end()) {
      throw Error(ErrorCode::ItemNotPresent, std::string(arg) + " (no scene at " + describe(robot.at) + ")");
    }
    if (scene->second.requires_open && robot.opened != *name) {
      throw Error(ErrorCode::ContainerClosed, *name);
    }
    SceneItem* item = scene->second.find(arg);
    if (item == nullptr || item->quantity < 1) {
      throw Error(ErrorCode::ItemNotPresent, std::string(arg) + " at " + *name);
    }
    item->quantity -= 1;
    robot.holding = Holding{item->name, *name};
    Effect effect{std::string(verb), item->name, item->price, {}, std::nullopt};
    if (verb == verbs::kBuy) {
      robot.money_spent += item->price.value_or(0);
    }
    return effect;
  }
  if (verb == verbs::kPass) {
    if (!robot.holding) {
      throw Error(ErrorCode::NotHolding, "nothing to pass");
    }
    const Pose recipient = world.pose_of(robot.at);
    robot.delivered.push_back(Delivery{robot.holding->item, robot.holding->source, recipient});
    Effect effect{std::string(verbs::kPass), robot.holding->item, std::nullopt, {}, recipient};
    robot.holding.reset();
    return effect;
  }
  if (verb == verbs::kSpeak) {
    robot.utterances.emplace_back(arg);
    return Effect{std::string(verbs::kSpeak), {}, std::nullopt, std::string(arg), std::nullopt};
  }
  throw Error(ErrorCode::InvalidArgument, "apply_action does not handle verb " + std::string(verb));
}

}  // namespace robotask
