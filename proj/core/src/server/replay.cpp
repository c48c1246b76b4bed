#include "rdg/server/replay.hpp"

#include "rdg/util/errors.hpp"

namespace rdg {

GameState replay(const SessionLog& log, const WorldMap& map) {
  const auto& h = log.header;
  if (h.map_version != map.version())
    throw ReplayError("log was recorded on map " + h.map_version + ", replaying on " + map.version());

  GameState game = GameState::new_game(h.variant, h.director, h.matcher, h.seed, map);
  std::int64_t expect_seq = 1;
  Millis last_ts = 0;
  for (const auto& e : log.events) {
    const std::string at = "event seq " + std::to_string(e.seq);
    if (e.seq != expect_seq) throw ReplayError(at + ": expected seq " + std::to_string(expect_seq));
    if (e.ts < last_ts) throw ReplayError(at + ": timestamp goes backwards");
    ++expect_seq;
    last_ts = e.ts;
    try {
      switch (e.kind) {
        case MsgKind::START: game.start(e.ts); break;
        case MsgKind::SELECT: {
          std::optional<int> episode;
          if (e.payload.contains("episode")) episode = e.payload["episode"].get<int>();
          game.select_at(e.ts, e.from, e.payload.at("country").get<std::string>(), episode);
          break;
        }
        case MsgKind::REQUEST_NEXT: game.request_next_at(e.ts, e.from); break;
        case MsgKind::TIMER:
        case MsgKind::END: game.tick(e.ts); break;
        case MsgKind::TARGET: {
          const auto logged = e.payload.at("country").get<std::string>();
          if (!game.target() || *game.target() != logged)
            throw ReplayError("logged target " + logged + " differs from recomputed " + game.target().value_or("none"));
          break;
        }
        case MsgKind::SCORE: {
          const int logged = e.payload.at("score").get<int>();
          if (logged != game.score())
            throw ReplayError("logged score " + std::to_string(logged) + " differs from recomputed " +
                              std::to_string(game.score()));
          break;
        }
        default: break;
      }
    } catch (const ReplayError& ex) {
      throw ReplayError(at + ": " + ex.what());
    } catch (const nlohmann::json::exception& ex) {
      throw ReplayError(at + ": malformed payload: " + ex.what());
    } catch (const Error& ex) {
      throw ReplayError(at + ": " + ex.code() + ": " + ex.what());
    }
  }
  return game;
}

}  // namespace rdg
