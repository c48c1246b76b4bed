#include "rdg/server/matchmaker.hpp"

#include <algorithm>
#include <set>

#include "rdg/util/errors.hpp"

namespace rdg {

std::string_view to_string(MatcherKind k) {
  switch (k) {
    case MatcherKind::human: return "human";
    case MatcherKind::wizard: return "wizard";
    case MatcherKind::autonomous: return "autonomous";
  }
  return "?";
}

int Matchmaker::enqueue(ParticipantId participant, SeatRole role, Variant variant, Millis now) {
  if (queued(participant)) throw QueueError("participant '" + participant + "' is already queued");
  entries_.push_back(QueueEntry{std::move(participant), role, variant, now, ++counter_});
  return position(entries_.back().participant);
}

bool Matchmaker::remove(const ParticipantId& participant) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const QueueEntry& e) { return e.participant == participant; });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

bool Matchmaker::queued(const ParticipantId& participant) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const QueueEntry& e) { return e.participant == participant; });
}

int Matchmaker::position(const ParticipantId& participant) const {
  int ahead = 0;
  const QueueEntry* me = nullptr;
  for (const auto& e : entries_) {
    if (e.participant == participant) {
      me = &e;
      break;
    }
  }
  if (!me) return 0;
  for (const auto& e : entries_) {
    if (&e == me) break;
    if (e.role == me->role && e.variant == me->variant) ++ahead;
  }
  return ahead + 1;
}

std::optional<Pairing> Matchmaker::pair(bool wizard_free, bool autonomous_free) {
  std::set<Variant> seen;
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->role != SeatRole::director) continue;
    // Only the head director of each variant may be paired.
    if (!seen.insert(it->variant).second) continue;
    auto human = std::find_if(entries_.begin(), entries_.end(), [&](const QueueEntry& e) {
      return e.role == SeatRole::matcher && e.variant == it->variant;
    });
    Pairing p;
    p.director = *it;
    if (human != entries_.end()) {
      p.matcher_kind = MatcherKind::human;
      p.human = *human;
      entries_.erase(human);
    } else if (wizard_free) {
      p.matcher_kind = MatcherKind::wizard;
    } else if (autonomous_free) {
      p.matcher_kind = MatcherKind::autonomous;
    } else {
      continue;
    }
    entries_.erase(it);
    return p;
  }
  return std::nullopt;
}

}  // namespace rdg
