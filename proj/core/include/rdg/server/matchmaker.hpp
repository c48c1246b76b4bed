#pragma once

#include <cstdint>
#include <list>
#include <optional>
#include <string>
#include <vector>

#include "rdg/game/game_state.hpp"

namespace rdg {

enum class SeatRole { director, matcher };

struct QueueEntry {
  ParticipantId participant;
  SeatRole role = SeatRole::director;
  Variant variant = Variant::web;
  Millis enqueued_at = 0;
  std::uint64_t order = 0;  // global enqueue counter
};

enum class MatcherKind { human, wizard, autonomous };
std::string_view to_string(MatcherKind k);

struct Pairing {
  QueueEntry director;
  MatcherKind matcher_kind = MatcherKind::autonomous;
  std::optional<QueueEntry> human;  // set when matcher_kind == human
};

/// FIFO lobby. Directors wait for a Matcher: a queued human of the same
/// variant first, then a free wizard, then a free autonomous slot. Pairing
/// order equals enqueue order within a variant.
class Matchmaker {
 public:
  /// Returns the 1-based position. Throws QueueError if already queued.
  int enqueue(ParticipantId participant, SeatRole role, Variant variant, Millis now);
  bool remove(const ParticipantId& participant);
  bool queued(const ParticipantId& participant) const;
  /// Count ahead in the same (role, variant) line, plus one; 0 if absent.
  int position(const ParticipantId& participant) const;

  /// Dequeues the next pairing, if any matcher is available.
  std::optional<Pairing> pair(bool wizard_free, bool autonomous_free);

  const std::list<QueueEntry>& entries() const { return entries_; }

 private:
  std::list<QueueEntry> entries_;  // enqueue order
  std::uint64_t counter_ = 0;
};

}  // namespace rdg
