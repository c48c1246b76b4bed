#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdg/server/session_log.hpp"
#include "rdg/sim/bots.hpp"

namespace rdg {

struct SimConfig {
  Variant variant = Variant::web;
  bool alternate_variants = false;  // game i uses WEB for even i, EMBODIED for odd
  BotPolicy director;
  BotPolicy matcher;
  MatcherSeat seat = MatcherSeat::human;
  std::uint64_t seed = 1;
  int games = 1;
  bool shared_screen = false;  // attach a shared-screen observer to each game
};

struct GameReport {
  std::string session;
  Variant variant = Variant::web;
  std::uint64_t seed = 0;
  int score = 0;
  int served = 0;
  int resolved = 0;
  int messages = 0;  // logged events
  std::string log;   // full JSONL session log
  // Frames delivered per seat, by kind.
  std::map<std::string, int> director_received;
  std::map<std::string, int> matcher_received;
  std::map<std::string, int> screen_received;
};

struct SimReport {
  std::vector<GameReport> games;

  double mean_score() const;
  nlohmann::json to_json(bool include_logs = false) const;
};

/// Validates policies (a perfect bot must have knowledge 1). Throws ArgumentError.
void validate(const SimConfig& config);

/// Plays `config.games` complete games through an in-process session server
/// on a simulated clock. Identical configs give identical reports. Any
/// ERROR delivered to a bot aborts the batch with ProtocolError.
SimReport run_sim(const WorldMap& map, const Repertoire& repertoire, const SimConfig& config,
                  const std::function<void(const GameReport&)>& on_game = {});

/// One game with the given game seed; used by run_sim.
GameReport run_game(const WorldMap& map, const DescriptionParser& parser, const Repertoire& repertoire,
                    const SimConfig& config, Variant variant, std::uint64_t seed, int index,
                    std::shared_ptr<const NavigationPlanner> planner = nullptr);

}  // namespace rdg
