// rdgmap: run the game server, simulate games, replay and summarize logs,
// and inspect the description resolver.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "rdg/net/http_server.hpp"
#include "rdg/resolver/parser.hpp"
#include "rdg/resolver/resolver.hpp"
#include "rdg/server/replay.hpp"
#include "rdg/server/session_server.hpp"
#include "rdg/sim/corpus_stats.hpp"
#include "rdg/sim/run_sim.hpp"
#include "rdg/util/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DataPaths {
  std::string map = std::string(RDG_DEFAULT_DATA_DIR) + "/world.geojson";
  std::string repertoire = std::string(RDG_DEFAULT_DATA_DIR) + "/repertoire.json";
};

void add_data_options(CLI::App* cmd, DataPaths& d) {
  cmd->add_option("--map", d.map, "Map GeoJSON file")->capture_default_str();
  cmd->add_option("--repertoire", d.repertoire, "Utterance repertoire file")->capture_default_str();
}

rdg::HttpServer* g_http = nullptr;

void on_signal(int) {
  if (g_http) g_http->stop();
}

int cmd_serve(const DataPaths& d, const std::string& address, std::uint16_t port, const std::string& logs_dir,
              const std::string& memory_file, const std::string& static_dir, std::uint64_t seed, int autonomous) {
  auto map = rdg::WorldMap::load(d.map);
  auto rep = rdg::Repertoire::load(d.repertoire);
  rdg::DirLogStore logs(logs_dir);
  rdg::FileMemoryStore memory(memory_file.empty() ? fs::path(logs_dir) / "memory.json" : fs::path(memory_file));
  rdg::ServerConfig sc;
  sc.seed = seed;
  sc.autonomous_pool = autonomous;
  rdg::SessionServer server(map, rep, logs, &memory, sc);
  rdg::HttpConfig hc;
  hc.address = address;
  hc.port = port;
  hc.map_file = d.map;
  hc.repertoire_file = d.repertoire;
  hc.static_dir = static_dir;
  rdg::HttpServer http(server, hc);
  g_http = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("serving map {} on http://{}:{}", map.version().substr(0, 12), address, http.port());
  http.run();
  g_http = nullptr;
  return 0;
}

int cmd_sim(const DataPaths& d, rdg::SimConfig cfg, const std::string& variant, const std::string& logs_dir,
            bool as_json) {
  auto map = rdg::WorldMap::load(d.map);
  auto rep = rdg::Repertoire::load(d.repertoire);
  if (variant == "alternate") {
    cfg.alternate_variants = true;
  } else {
    cfg.variant = rdg::variant_from_string(variant);
  }
  std::optional<rdg::DirLogStore> store;
  if (!logs_dir.empty()) store.emplace(logs_dir);
  auto report = rdg::run_sim(map, rep, cfg, [&](const rdg::GameReport& g) {
    if (!store) return;
    std::istringstream lines(g.log);
    for (std::string line; std::getline(lines, line);) store->append(g.session, line);
  });
  if (as_json) {
    std::cout << report.to_json().dump(2) << "\n";
    return 0;
  }
  fmt::print("{:<10} {:<9} {:>5} {:>8} {:>8}\n", "game", "variant", "score", "targets", "events");
  for (const auto& g : report.games)
    fmt::print("{:<10} {:<9} {:>5} {:>8} {:>8}\n", g.session, rdg::to_string(g.variant), g.score, g.resolved,
               g.messages);
  fmt::print("mean score {:.2f} over {} games\n", report.mean_score(), report.games.size());
  return 0;
}

int cmd_replay(const DataPaths& d, const std::string& file) {
  auto map = rdg::WorldMap::load(d.map);
  std::ifstream in(file, std::ios::binary);
  if (!in) throw rdg::NotFoundError("cannot open " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  auto log = rdg::SessionLog::parse(ss.str());
  auto game = rdg::replay(log, map);
  json out = {{"session", log.header.session},
              {"variant", rdg::to_string(game.variant())},
              {"phase", rdg::to_string(game.phase())},
              {"score", game.score()},
              {"resolved", game.resolved_count()},
              {"served", game.served_targets()},
              {"events", log.events.size()}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_stats(const DataPaths& d, const std::string& logs_dir, bool as_json) {
  auto map = rdg::WorldMap::load(d.map);
  rdg::DirLogStore store(logs_dir);
  auto stats = rdg::corpus_stats(store, map);
  if (as_json) {
    std::cout << stats.to_json().dump(2) << "\n";
  } else {
    std::cout << stats.to_table();
  }
  return 0;
}

rdg::ResolutionContext resolve_context(const rdg::WorldMap& map, const std::vector<std::string>& anchors,
                                       const std::string& known) {
  rdg::ResolutionContext ctx;
  ctx.map = &map;
  if (known == "all") {
    for (const auto& [id, c] : map.countries()) ctx.known.insert(id);
  } else if (known == "web" || known == "embodied") {
    ctx.known = rdg::seed_countries(rdg::variant_from_string(known));
  } else if (!known.empty()) {
    std::stringstream ss(known);
    for (std::string id; std::getline(ss, id, ',');) {
      map.country(id);
      ctx.known.insert(id);
    }
  }
  for (const auto& a : anchors) {
    map.country(a);
    ctx.anchors.push_back(a);
  }
  return ctx;
}

json step_json(const rdg::EpisodeStep& step, const json& episode) {
  json clauses = json::array(), cands = json::array();
  for (const auto& c : step.clauses) clauses.push_back(rdg::to_string(c));
  for (const auto& c : step.result.candidates)
    cands.push_back({{"id", c.id}, {"score", c.score}, {"derivation", c.derivation}});
  json j = {{"episode", episode}, {"utterance", step.utterance}, {"clauses", clauses}, {"candidates", cands}};
  if (step.promoted) j["promoted"] = *step.promoted;
  return j;
}

int cmd_resolve(const DataPaths& d, const std::vector<std::string>& utterances, const std::vector<std::string>& anchors,
                const std::string& known, const std::string& batch) {
  auto map = rdg::WorldMap::load(d.map);
  rdg::DescriptionParser parser(map);
  const auto ctx = resolve_context(map, anchors, known);
  rdg::EpisodeResolver episode(parser, ctx);

  if (!batch.empty()) {
    // One record per line: {"episode": any, "text": "..."} or plain text.
    // A change of episode value, or a blank plain line, starts a new episode.
    std::ifstream file;
    if (batch != "-") {
      file.open(batch);
      if (!file) throw rdg::NotFoundError("cannot open " + batch);
    }
    std::istream& in = batch == "-" ? std::cin : file;
    json current = 0;
    int plain_episode = 0;
    for (std::string line; std::getline(in, line);) {
      json ep;
      std::string text;
      if (!line.empty() && line.front() == '{') {
        auto rec = json::parse(line);
        ep = rec.value("episode", json(nullptr));
        text = rec.at("text").get<std::string>();
      } else if (line.empty()) {
        ++plain_episode;
        continue;
      } else {
        ep = plain_episode;
        text = line;
      }
      if (ep != current) {
        episode.reset(ctx.anchors);
        current = ep;
      }
      std::cout << step_json(episode.feed(text), ep).dump() << "\n";
    }
    return 0;
  }

  for (const auto& u : utterances) {
    const auto& step = episode.feed(u);
    fmt::print("> {}\n", u);
    for (const auto& c : step.clauses) fmt::print("  clause {}\n", rdg::to_string(c));
    for (const auto& c : step.result.candidates) fmt::print("  {:<4} {:>5.1f}  {}\n", c.id, c.score, c.derivation);
    if (step.promoted) fmt::print("  anchor -> {}\n", *step.promoted);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference game on a world map"};
  app.require_subcommand(1);
  DataPaths data;

  auto* serve = app.add_subcommand("serve", "Run the game server");
  std::string address = "127.0.0.1", logs_dir = "logs", memory_file, static_dir;
  std::uint16_t port = 8080;
  std::uint64_t seed = 1;
  int autonomous = 4;
  add_data_options(serve, data);
  serve->add_option("--address", address)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--logs", logs_dir, "Session log directory")->capture_default_str();
  serve->add_option("--memory", memory_file, "Agent memory file (default <logs>/memory.json)");
  serve->add_option("--static", static_dir, "Built web-ui directory");
  serve->add_option("--seed", seed)->capture_default_str();
  serve->add_option("--autonomous", autonomous, "Concurrent autonomous-agent sessions")->capture_default_str();

  auto* sim = app.add_subcommand("sim", "Play simulated games");
  rdg::SimConfig cfg;
  cfg.director.latency_ms = 3'000;
  std::string variant = "web", dstrat = "perfect", mstrat = "perfect", seat = "human", sim_logs;
  bool sim_json = false;
  add_data_options(sim, data);
  sim->add_option("--games", cfg.games)->capture_default_str();
  sim->add_option("--seed", cfg.seed)->capture_default_str();
  sim->add_option("--variant", variant, "web, embodied or alternate")->capture_default_str();
  sim->add_option("--director", dstrat, "perfect, anchor_navigator or random")->capture_default_str();
  sim->add_option("--matcher", mstrat, "perfect, anchor_navigator or random")->capture_default_str();
  sim->add_option("--director-knowledge", cfg.director.knowledge_level)->capture_default_str();
  sim->add_option("--matcher-knowledge", cfg.matcher.knowledge_level)->capture_default_str();
  sim->add_option("--director-latency", cfg.director.latency_ms, "ms per turn")->capture_default_str();
  sim->add_option("--matcher-latency", cfg.matcher.latency_ms, "ms per turn")->capture_default_str();
  sim->add_option("--seat", seat, "human, wizard or autonomous")->capture_default_str();
  sim->add_option("--logs", sim_logs, "Write session logs to this directory");
  sim->add_flag("--json", sim_json);

  auto* rp = app.add_subcommand("replay", "Replay a session log and print the outcome");
  std::string replay_file;
  add_data_options(rp, data);
  rp->add_option("log", replay_file, "Session .jsonl file")->required();

  auto* st = app.add_subcommand("stats", "Summarize a directory of session logs");
  std::string stats_dir = "logs";
  bool stats_json = false;
  add_data_options(st, data);
  st->add_option("logs", stats_dir)->capture_default_str();
  st->add_flag("--json", stats_json);

  auto* rs = app.add_subcommand("resolve", "Resolve descriptions, one utterance per argument");
  std::vector<std::string> utterances, anchors;
  std::string known = "all";
  add_data_options(rs, data);
  std::string batch;
  rs->add_option("utterances", utterances);
  rs->add_option("--batch", batch, "Line-delimited transcript file ('-' for stdin); prints JSON per utterance");
  rs->add_option("--anchor", anchors, "Standing anchor id (repeatable)");
  rs->add_option("--known", known, "all, web, embodied or comma-separated ids")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(data, address, port, logs_dir, memory_file, static_dir, seed, autonomous);
    if (*sim) {
      cfg.director.strategy = rdg::strategy_from_string(dstrat);
      cfg.matcher.strategy = rdg::strategy_from_string(mstrat);
      cfg.seat = rdg::seat_from_string(seat);
      return cmd_sim(data, cfg, variant, sim_logs, sim_json);
    }
    if (*rp) return cmd_replay(data, replay_file);
    if (*st) return cmd_stats(data, stats_dir, stats_json);
    if (*rs) {
      if (utterances.empty() == batch.empty()) throw rdg::ArgumentError("give utterances or --batch, not both");
      return cmd_resolve(data, utterances, anchors, known, batch);
    }
  } catch (const rdg::Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", e.code(), e.what());
    return 2;
  } catch (const json::exception& e) {
    fmt::print(stderr, "error [validation]: {}\n", e.what());
    return 2;
  }
  return 0;
}
