#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rdg/game/game_state.hpp"

namespace rdg {

struct Anchor {
  std::string label;
  CountryId id;
  bool operator==(const Anchor&) const = default;
};

/// What the agent can locate. known() only grows during a game.
class AgentKnowledge {
 public:
  AgentKnowledge() = default;
  explicit AgentKnowledge(std::set<CountryId> known) : known_(std::move(known)) {}

  const std::set<CountryId>& known() const { return known_; }
  bool knows(std::string_view id) const { return known_.contains(std::string(id)); }
  const std::vector<Anchor>& anchors() const { return anchors_; }
  /// Countries added during this game, to be persisted at game end.
  const std::set<CountryId>& learned() const { return learned_; }

  /// Returns true if the id was new. Throws NotFoundError for unknown ids.
  bool learn(const WorldMap& map, const CountryId& id);
  /// Returns false for a duplicate. Throws ArgumentError on an empty label.
  bool add_anchor(const WorldMap& map, std::string label, const CountryId& id);

 private:
  std::set<CountryId> known_;
  std::set<CountryId> learned_;
  std::vector<Anchor> anchors_;
};

/// Countries the agent can locate before any play.
std::set<CountryId> seed_countries(Variant v);

/// Cross-session memory keyed by director id. Writes are unions, so
/// concurrent sessions commute.
class MemoryStore {
 public:
  virtual ~MemoryStore() = default;
  virtual std::set<CountryId> recall(const ParticipantId& director) = 0;
  virtual void remember(const ParticipantId& director, const std::set<CountryId>& learned) = 0;
};

class InMemoryStore final : public MemoryStore {
 public:
  std::set<CountryId> recall(const ParticipantId& director) override;
  void remember(const ParticipantId& director, const std::set<CountryId>& learned) override;

 private:
  std::mutex mu_;
  std::map<ParticipantId, std::set<CountryId>> data_;
};

/// One JSON object {director: [ids]} rewritten atomically on each update.
/// A missing file is an empty store; an unreadable one raises StorageError.
class FileMemoryStore final : public MemoryStore {
 public:
  explicit FileMemoryStore(std::filesystem::path path) : path_(std::move(path)) {}
  std::set<CountryId> recall(const ParticipantId& director) override;
  void remember(const ParticipantId& director, const std::set<CountryId>& learned) override;

 private:
  std::map<ParticipantId, std::set<CountryId>> read_all();
  std::mutex mu_;
  std::filesystem::path path_;
};

struct KnowledgeInit {
  AgentKnowledge knowledge;
  std::optional<std::string> warning;  // set when memory could not be read
};

/// Variant seeds, plus the director's remembered countries in EMBODIED.
KnowledgeInit init_knowledge(Variant v, const ParticipantId& director, MemoryStore* store);

}  // namespace rdg
