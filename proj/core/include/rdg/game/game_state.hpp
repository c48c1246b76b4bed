#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rdg/world/world_map.hpp"

namespace rdg {

using ParticipantId = std::string;
/// Server milliseconds; inside a session, milliseconds since session start.
using Millis = std::int64_t;

enum class Variant { web, embodied };
enum class Phase { lobby, running, finished };

std::string_view to_string(Variant v);
std::string_view to_string(Phase p);
Variant variant_from_string(std::string_view s);  // throws ArgumentError

inline constexpr Millis kGameDurationMs = 600'000;

struct SelectionOutcome {
  bool accepted = false;
  int scored = 0;         // 0, 1 or 2
  bool advanced = false;  // target resolved and a new one drawn (or game over)
  bool reveal = false;    // selection is shown to the Director / shared screen
  bool correct = false;   // choice matched the target (EMBODIED select, WEB request_next)
  int guess = 0;          // EMBODIED: 1 or 2; WEB: 0
  std::optional<CountryId> resolved;  // the target that was just closed
};

/// Authoritative state of one game. Mutated only by the owning session.
class GameState {
 public:
  /// Throws ArgumentError if director == matcher.
  static GameState new_game(Variant variant, ParticipantId director, ParticipantId matcher,
                            std::uint64_t seed, const WorldMap& map);

  /// LOBBY -> RUNNING at time `now`; draws the first target.
  void start(Millis now);

  /// Uniform draw over selectable countries not yet served. Ends the game
  /// (returns nullopt) when the pool is exhausted.
  std::optional<CountryId> next_target();

  /// Matcher selection. `episode`, when given, is the 1-based target ordinal
  /// the client is guessing on; a stale one is rejected.
  SelectionOutcome select(std::string_view who, std::string_view choice,
                          std::optional<int> episode = std::nullopt);

  /// Director's "next target" button (WEB only).
  SelectionOutcome request_next(std::string_view who);

  /// Moves the clock to `now`. FINISHED once elapsed >= game duration.
  /// Idempotent; the clock never moves backwards.
  void tick(Millis now);

  // Timed forms used by the live session and by replay. The game window is
  // closed: actions stamped exactly at the deadline are applied, and the
  // game finishes only on tick(deadline); anything later is rejected with
  // ClockExpiredError.
  SelectionOutcome select_at(Millis now, std::string_view who, std::string_view choice,
                             std::optional<int> episode = std::nullopt);
  SelectionOutcome request_next_at(Millis now, std::string_view who);

  Variant variant() const { return variant_; }
  Phase phase() const { return phase_; }
  const ParticipantId& director() const { return director_; }
  const ParticipantId& matcher() const { return matcher_; }
  std::uint64_t seed() const { return seed_; }
  const std::optional<CountryId>& target() const { return target_; }
  const std::vector<CountryId>& served_targets() const { return served_; }
  const std::optional<CountryId>& current_selection() const { return selection_; }
  int guesses_used() const { return guesses_used_; }
  int score() const { return score_; }
  /// 1-based ordinal of the current target; 0 before start.
  int episode() const { return static_cast<int>(served_.size()); }
  /// Number of targets closed by an advance.
  int resolved_count() const { return resolved_; }
  Millis remaining_ms() const { return remaining_ms_; }
  /// Remaining whole seconds, rounded up.
  int clock_seconds() const { return static_cast<int>((remaining_ms_ + 999) / 1000); }
  Millis deadline() const { return started_at_ + kGameDurationMs; }
  bool expired_by_clock() const { return expired_by_clock_; }

 private:
  GameState() = default;
  void require_running() const;
  void advance();

  const WorldMap* map_ = nullptr;
  Variant variant_ = Variant::web;
  Phase phase_ = Phase::lobby;
  ParticipantId director_;
  ParticipantId matcher_;
  std::uint64_t seed_ = 0;
  std::mt19937_64 rng_;
  std::optional<CountryId> target_;
  std::vector<CountryId> served_;
  std::optional<CountryId> selection_;
  int guesses_used_ = 0;
  int score_ = 0;
  int resolved_ = 0;
  Millis started_at_ = 0;
  Millis now_ = 0;
  Millis remaining_ms_ = kGameDurationMs;
  bool expired_by_clock_ = false;
};

}  // namespace rdg
