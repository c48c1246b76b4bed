#include "rdg/agent/knowledge.hpp"

#include "rdg/util/errors.hpp"

namespace rdg {

bool AgentKnowledge::learn(const WorldMap& map, const CountryId& id) {
  if (!map.contains(id)) throw NotFoundError("unknown country '" + id + "'");
  if (!known_.insert(id).second) return false;
  learned_.insert(id);
  return true;
}

bool AgentKnowledge::add_anchor(const WorldMap& map, std::string label, const CountryId& id) {
  if (label.empty()) throw ArgumentError("anchor label must not be empty");
  if (!map.contains(id)) throw NotFoundError("unknown country '" + id + "'");
  Anchor a{std::move(label), id};
  for (const auto& have : anchors_) {
    if (have == a) return false;
  }
  anchors_.push_back(std::move(a));
  return true;
}

std::set<CountryId> seed_countries(Variant v) {
  std::set<CountryId> s = {"USA", "CAN", "MEX", "BRA", "IND", "CHN", "RUS", "AUS", "ITA"};
  if (v == Variant::embodied) s.insert({"SWE", "FRA"});
  return s;
}

KnowledgeInit init_knowledge(Variant v, const ParticipantId& director, MemoryStore* store) {
  KnowledgeInit out{AgentKnowledge(seed_countries(v)), std::nullopt};
  if (v != Variant::embodied || !store) return out;
  try {
    auto remembered = store->recall(director);
    auto known = out.knowledge.known();
    known.insert(remembered.begin(), remembered.end());
    out.knowledge = AgentKnowledge(std::move(known));
  } catch (const StorageError& e) {
    out.warning = std::string("session memory unavailable, starting from defaults: ") + e.what();
  }
  return out;
}

}  // namespace rdg
