#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "robotask/codec.hpp"
#include "robotask/gateway/scenario.hpp"
#include "robotask/gateway/session_hub.hpp"
#include "robotask/gateway/tcp_server.hpp"
#include "robotask/instruction.hpp"
#include "robotask/planner.hpp"
#include "robotask/script_compiler.hpp"
#include "robotask/script_store.hpp"
#include "robotask/world.hpp"

namespace fs = std::filesystem;
using namespace robotask;

namespace {

const fs::path kDataDir = ROBOTASK_DATA_DIR;

gateway::TcpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) {
    g_server->stop();
  }
}

int cmd_plan(const std::string& text, const fs::path& world_file, const fs::path& catalog_file) {
  const auto world = load_world_file(world_file);
  auto catalog = std::make_shared<const PlanCatalog>(load_catalog_file(catalog_file));
  CatalogPlanner planner(catalog);
  const auto instruction = parse_instruction(text);
  const auto seq = plan_via_adapter(instruction, planner, catalog->verbs);
  std::cout << "Action sequence:\n";
  for (std::size_t i = 0; i < seq.steps.size(); ++i) {
    std::cout << "  " << i + 1 << ". " << describe_step(seq.steps[i]) << "\n";
  }
  const auto script = compile(seq, world.locations);
  std::cout << "Task script " << script.id << ":\n";
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    std::cout << "  " << i + 1 << ". " << describe_step(script.steps[i]) << "\n";
  }
  return 0;
}

int cmd_run(const fs::path& scenario_file, std::optional<int> hallucinate, std::optional<std::uint64_t> seed,
            std::optional<fs::path> transcript, std::optional<fs::path> store) {
  const auto scenario = gateway::load_scenario(scenario_file);
  gateway::RunOptions options;
  if (hallucinate || seed) {
    NoiseConfig noise = scenario.noise;
    if (hallucinate) {
      noise.count = *hallucinate;
    }
    if (seed) {
      noise.seed = *seed;
    }
    options.noise = noise;
  }
  options.transcript = std::move(transcript);
  options.store = std::move(store);
  const auto report = gateway::run_scenario(scenario, options);
  std::cout << report.summary();
  return report.ok ? 0 : 1;
}

int cmd_serve(const fs::path& world_file, const fs::path& store_file, const fs::path& catalog_file,
              std::optional<fs::path> distractors_file, const std::string& host, std::uint16_t port, int hallucinate,
              std::uint64_t seed, long timeout_ms) {
  ScriptStore store(store_file);
  gateway::HubConfig config;
  config.world = load_world_file(world_file);
  config.catalog = std::make_shared<const PlanCatalog>(load_catalog_file(catalog_file));
  if (distractors_file) {
    config.distractors = load_distractors_file(*distractors_file);
  }
  config.noise = NoiseConfig{hallucinate, seed};
  config.store = &store;
  if (timeout_ms > 0) {
    config.session.feedback_timeout = std::chrono::milliseconds(timeout_ms);
  }
  gateway::SessionHub hub(std::move(config));
  gateway::TcpServer server(hub, host, port);
  server.listen();
  std::cout << "listening on " << host << ":" << server.port() << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Templated robot task scripting engine"};
  app.require_subcommand(1);

  auto* plan = app.add_subcommand("plan", "Print the action sequence and compiled script for an instruction");
  std::string plan_text;
  fs::path plan_world = kDataDir / "worlds/eng2.json";
  fs::path catalog = kDataDir / "catalog.json";
  plan->add_option("--text", plan_text, "Instruction text")->required();
  plan->add_option("--world", plan_world, "World file")->check(CLI::ExistingFile);
  plan->add_option("--catalog", catalog, "Plan catalog file")->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run a scenario headlessly");
  fs::path scenario_file;
  std::optional<int> hallucinate;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> transcript;
  std::optional<fs::path> run_store;
  run->add_option("--scenario", scenario_file, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--hallucinate", hallucinate, "Number of injected distractor items")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "Hallucination seed");
  run->add_option("--transcript", transcript, "Write the execution trace (JSON lines) here");
  run->add_option("--store", run_store, "Persistent script store file");

  auto* serve = app.add_subcommand("serve", "Serve sessions over newline-delimited JSON on TCP");
  fs::path serve_world;
  fs::path serve_store;
  std::optional<fs::path> distractors = kDataDir / "distractors.json";
  std::string host = "127.0.0.1";
  std::uint16_t port = gateway::default_port();
  int serve_hallucinate = 0;
  std::uint64_t serve_seed = 0;
  long timeout_ms = 300000;
  serve->add_option("--world", serve_world, "World file")->required()->check(CLI::ExistingFile);
  serve->add_option("--store", serve_store, "Script store file")->required();
  serve->add_option("--port", port, "TCP port (default $ROBOTASK_PORT or 8765)");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--catalog", catalog, "Plan catalog file")->check(CLI::ExistingFile);
  serve->add_option("--distractors", distractors, "Distractor fixture file");
  serve->add_option("--hallucinate", serve_hallucinate, "Number of injected distractor items")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--seed", serve_seed, "Hallucination seed");
  serve->add_option("--feedback-timeout-ms", timeout_ms, "Expire unanswered questions after this long (0: never)")
      ->check(CLI::NonNegativeNumber);

  auto* store = app.add_subcommand("store", "Inspect or clear a script store");
  store->require_subcommand(1);
  fs::path store_file;
  auto* ls = store->add_subcommand("ls", "List stored instructions");
  auto* clear = store->add_subcommand("clear", "Remove all stored scripts");
  for (auto* sub : {ls, clear}) {
    sub->add_option("--store", store_file, "Script store file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*plan) {
      return cmd_plan(plan_text, plan_world, catalog);
    }
    if (*run) {
      return cmd_run(scenario_file, hallucinate, seed, transcript, run_store);
    }
    if (*serve) {
      return cmd_serve(serve_world, serve_store, catalog, distractors, host, port, serve_hallucinate, serve_seed,
                       timeout_ms);
    }
    if (*ls) {
      ScriptStore s(store_file);
      for (const auto& e : s.entries()) {
        std::cout << e.created_at << "\t" << e.script_id << "\t" << e.instruction_text << "\n";
      }
      return 0;
    }
    if (*clear) {
      ScriptStore s(store_file);
      const auto n = s.entries().size();
      s.clear();
      std::cout << "removed " << n << " entr" << (n == 1 ? "y" : "ies") << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
