#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "rdg/game/game_state.hpp"

namespace rdg {

enum class MsgKind {
  JOIN,
  QUEUE_POS,
  PAIRED,
  START,
  TARGET,
  HOVER,
  SELECT,
  SELECTION_SHOWN,
  UTTERANCE,
  CHAT,
  REQUEST_NEXT,
  SCORE,
  EMBODIMENT,
  TIMER,
  END,
  QUESTIONNAIRE,
  ERROR,
  ANCHOR,     // wizard adds an anchoring point
  KNOWLEDGE,  // agent knowledge snapshot for the wizard console
};

std::string_view to_string(MsgKind k);
std::optional<MsgKind> kind_from_string(std::string_view s);

struct WireMessage {
  std::int64_t seq = 0;
  std::string session;
  Millis ts = 0;
  MsgKind kind = MsgKind::ERROR;
  nlohmann::json payload = nlohmann::json::object();

  std::string to_text() const;
  /// Client frames need seq, kind and (optionally) an object payload;
  /// session and ts are ignored. Throws ProtocolError.
  static WireMessage parse(std::string_view text);
};

}  // namespace rdg
