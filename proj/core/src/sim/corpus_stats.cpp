#include "rdg/sim/corpus_stats.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rdg/server/replay.hpp"
#include "rdg/util/errors.hpp"

namespace rdg {

using nlohmann::json;

SessionStats session_stats(const SessionLog& log, const WorldMap& map) {
  const GameState g = replay(log, map);
  SessionStats s;
  s.session = log.header.session;
  s.variant = log.header.variant;
  s.matcher_kind = log.header.matcher_kind;
  s.score = g.score();
  s.resolved = g.resolved_count();
  s.served = static_cast<int>(g.served_targets().size());
  std::string target;
  for (const auto& e : log.events) {
    switch (e.kind) {
      case MsgKind::TARGET: target = e.payload.value("country", ""); break;
      case MsgKind::CHAT: ++s.chats; break;
      case MsgKind::UTTERANCE: ++s.utterances; break;
      case MsgKind::SELECT:
        ++s.selections;
        if (e.payload.value("country", "") == target) ++s.correct_selections;
        break;
      default: break;
    }
  }
  if (s.resolved > 0) s.turns_per_target = static_cast<double>(s.chats + s.utterances) / s.resolved;
  if (s.selections > 0) s.guess_accuracy = static_cast<double>(s.correct_selections) / s.selections;
  return s;
}

CorpusStats corpus_stats(const LogStore& store, const WorldMap& map) {
  CorpusStats out;
  for (const auto& id : store.sessions()) {
    try {
      out.sessions.push_back(session_stats(SessionLog::parse(store.read(id)), map));
    } catch (const Error& e) {
      spdlog::warn("skipping {}: {}", id, e.what());
      out.skipped.push_back(id + ": " + e.what());
    }
  }
  return out;
}

json CorpusStats::to_json() const {
  json rows = json::array();
  for (const auto& s : sessions) {
    rows.push_back({{"session", s.session},
                    {"variant", to_string(s.variant)},
                    {"matcher_kind", s.matcher_kind},
                    {"score", s.score},
                    {"resolved", s.resolved},
                    {"served", s.served},
                    {"chats", s.chats},
                    {"utterances", s.utterances},
                    {"selections", s.selections},
                    {"correct_selections", s.correct_selections},
                    {"turns_per_target", s.turns_per_target},
                    {"guess_accuracy", s.guess_accuracy}});
  }
  return {{"sessions", rows}, {"skipped", skipped}};
}

std::string CorpusStats::to_table() const {
  std::string t = fmt::format("{:<16} {:<9} {:<11} {:>5} {:>8} {:>6} {:>10} {:>8}\n", "session", "variant", "matcher",
                              "score", "resolved", "served", "turns/tgt", "accuracy");
  double score = 0, resolved = 0, turns = 0, acc = 0;
  for (const auto& s : sessions) {
    t += fmt::format("{:<16} {:<9} {:<11} {:>5} {:>8} {:>6} {:>10.2f} {:>8.3f}\n", s.session, to_string(s.variant),
                     s.matcher_kind, s.score, s.resolved, s.served, s.turns_per_target, s.guess_accuracy);
    score += s.score;
    resolved += s.resolved;
    turns += s.turns_per_target;
    acc += s.guess_accuracy;
  }
  if (!sessions.empty()) {
    const double n = static_cast<double>(sessions.size());
    t += fmt::format("{:<16} {:<9} {:<11} {:>5.1f} {:>8.1f} {:>6} {:>10.2f} {:>8.3f}\n", "mean", "", "", score / n,
                     resolved / n, "", turns / n, acc / n);
  }
  for (const auto& s : skipped) t += "skipped " + s + "\n";
  return t;
}

}  // namespace rdg
