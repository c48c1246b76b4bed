#include "rdg/game/game_state.hpp"

#include <algorithm>

#include "rdg/util/errors.hpp"
#include "rdg/util/rng.hpp"

namespace rdg {

std::string_view to_string(Variant v) { return v == Variant::web ? "WEB" : "EMBODIED"; }

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::lobby: return "LOBBY";
    case Phase::running: return "RUNNING";
    case Phase::finished: return "FINISHED";
  }
  return "?";
}

Variant variant_from_string(std::string_view s) {
  if (s == "WEB" || s == "web") return Variant::web;
  if (s == "EMBODIED" || s == "embodied") return Variant::embodied;
  throw ArgumentError("unknown variant '" + std::string(s) + "'");
}

GameState GameState::new_game(Variant variant, ParticipantId director, ParticipantId matcher,
                              std::uint64_t seed, const WorldMap& map) {
  if (director == matcher) throw ArgumentError("director and matcher must differ");
  GameState g;
  g.map_ = &map;
  g.variant_ = variant;
  g.director_ = std::move(director);
  g.matcher_ = std::move(matcher);
  g.seed_ = seed;
  g.rng_.seed(seed);
  return g;
}

void GameState::start(Millis now) {
  if (phase_ != Phase::lobby) throw StateError("game already started");
  phase_ = Phase::running;
  started_at_ = now;
  now_ = now;
  remaining_ms_ = kGameDurationMs;
  next_target();
}

void GameState::require_running() const {
  if (phase_ == Phase::running) return;
  if (expired_by_clock_) throw ClockExpiredError("game clock expired");
  throw StateError(std::string("game is ") + std::string(to_string(phase_)));
}

std::optional<CountryId> GameState::next_target() {
  require_running();
  std::vector<CountryId> pool;
  pool.reserve(map_->selectable().size());
  for (const auto& id : map_->selectable()) {
    if (std::find(served_.begin(), served_.end(), id) == served_.end()) pool.push_back(id);
  }
  selection_.reset();
  guesses_used_ = 0;
  if (pool.empty()) {
    target_.reset();
    phase_ = Phase::finished;
    return std::nullopt;
  }
  const auto idx = uniform_below(rng_, pool.size());
  target_ = pool[idx];
  served_.push_back(*target_);
  return target_;
}

void GameState::advance() {
  ++resolved_;
  next_target();
}

SelectionOutcome GameState::select(std::string_view who, std::string_view choice, std::optional<int> episode) {
  require_running();
  if (who != matcher_) throw RoleError("only the matcher may select");
  if (!map_->contains(choice)) throw NotFoundError("unknown country '" + std::string(choice) + "'");

  SelectionOutcome out;
  if (episode && *episode != this->episode()) {
    if (variant_ == Variant::embodied) {
      throw GuessLimitError("no guesses left for target #" + std::to_string(*episode));
    }
    throw StateError("selection refers to a finished target");
  }

  if (variant_ == Variant::web) {
    selection_ = CountryId(choice);
    out.accepted = true;
    return out;
  }

  if (guesses_used_ >= 2) throw GuessLimitError("two guesses per target");
  ++guesses_used_;
  selection_ = CountryId(choice);
  out.accepted = true;
  out.reveal = true;
  out.guess = guesses_used_;
  out.correct = (choice == *target_);
  if (out.correct) {
    out.scored = guesses_used_ == 1 ? 2 : 1;
    score_ += out.scored;
  }
  if (out.correct || guesses_used_ == 2) {
    out.advanced = true;
    out.resolved = target_;
    advance();
  }
  return out;
}

SelectionOutcome GameState::request_next(std::string_view who) {
  require_running();
  if (variant_ == Variant::embodied) throw UnsupportedError("EMBODIED games advance automatically");
  if (who != director_) throw RoleError("only the director may request the next target");
  SelectionOutcome out;
  out.accepted = true;
  out.correct = selection_ && *selection_ == *target_;
  out.scored = out.correct ? 1 : 0;
  score_ += out.scored;
  out.advanced = true;
  out.resolved = target_;
  advance();
  return out;
}

void GameState::tick(Millis now) {
  if (phase_ == Phase::lobby) return;
  if (now <= now_) return;
  now_ = now;
  const Millis elapsed = now_ - started_at_;
  remaining_ms_ = std::max<Millis>(0, kGameDurationMs - elapsed);
  if (remaining_ms_ == 0 && phase_ == Phase::running) {
    phase_ = Phase::finished;
    expired_by_clock_ = true;
  }
}

SelectionOutcome GameState::select_at(Millis now, std::string_view who, std::string_view choice,
                                      std::optional<int> episode) {
  if (phase_ == Phase::running && now > deadline()) tick(now);
  if (phase_ == Phase::running) tick(std::min(now, deadline() - 1));
  // Every action stamped at the deadline is applied; the clock closes when
  // the deadline tick itself is processed.
  return select(who, choice, episode);
}

SelectionOutcome GameState::request_next_at(Millis now, std::string_view who) {
  if (phase_ == Phase::running && now > deadline()) tick(now);
  if (phase_ == Phase::running) tick(std::min(now, deadline() - 1));
  return request_next(who);
}

}  // namespace rdg
