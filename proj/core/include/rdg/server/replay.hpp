#pragma once

#include "rdg/game/game_state.hpp"
#include "rdg/server/session_log.hpp"

namespace rdg {

/// Rebuilds the final game state by folding logged events through
/// game-core. Logged TARGET and SCORE payloads are cross-checked against
/// the recomputed state. Throws ReplayError naming the first bad seq.
GameState replay(const SessionLog& log, const WorldMap& map);

}  // namespace rdg
