#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdg/server/session_log.hpp"
#include "rdg/world/world_map.hpp"

namespace rdg {

struct SessionStats {
  std::string session;
  Variant variant = Variant::web;
  std::string matcher_kind;
  int score = 0;
  int resolved = 0;
  int served = 0;
  int chats = 0;       // Director and Matcher CHAT events
  int utterances = 0;  // agent UTTERANCE events
  int selections = 0;
  int correct_selections = 0;
  double turns_per_target = 0.0;  // (chats + utterances) / resolved
  double guess_accuracy = 0.0;    // correct selections / selections
};

struct CorpusStats {
  std::vector<SessionStats> sessions;
  std::vector<std::string> skipped;  // "<session>: <reason>"

  nlohmann::json to_json() const;
  /// Fixed-width table, one row per session plus a mean row.
  std::string to_table() const;
};

/// Stats for one log. The log is replayed first; throws ReplayError.
SessionStats session_stats(const SessionLog& log, const WorldMap& map);

/// Stats over every session in the store. Logs that fail to parse or replay
/// are skipped with a warning rather than aborting the run.
CorpusStats corpus_stats(const LogStore& store, const WorldMap& map);

}  // namespace rdg
