#include "rdg/server/wire.hpp"

#include <array>

#include "rdg/util/errors.hpp"

namespace rdg {
namespace {

constexpr std::array<std::pair<MsgKind, std::string_view>, 19> kNames = {{
    {MsgKind::JOIN, "JOIN"},
    {MsgKind::QUEUE_POS, "QUEUE_POS"},
    {MsgKind::PAIRED, "PAIRED"},
    {MsgKind::START, "START"},
    {MsgKind::TARGET, "TARGET"},
    {MsgKind::HOVER, "HOVER"},
    {MsgKind::SELECT, "SELECT"},
    {MsgKind::SELECTION_SHOWN, "SELECTION_SHOWN"},
    {MsgKind::UTTERANCE, "UTTERANCE"},
    {MsgKind::CHAT, "CHAT"},
    {MsgKind::REQUEST_NEXT, "REQUEST_NEXT"},
    {MsgKind::SCORE, "SCORE"},
    {MsgKind::EMBODIMENT, "EMBODIMENT"},
    {MsgKind::TIMER, "TIMER"},
    {MsgKind::END, "END"},
    {MsgKind::QUESTIONNAIRE, "QUESTIONNAIRE"},
    {MsgKind::ERROR, "ERROR"},
    {MsgKind::ANCHOR, "ANCHOR"},
    {MsgKind::KNOWLEDGE, "KNOWLEDGE"},
}};

}  // namespace

std::string_view to_string(MsgKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<MsgKind> kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

std::string WireMessage::to_text() const {
  nlohmann::json j = {{"seq", seq}, {"session", session}, {"ts", ts}, {"kind", to_string(kind)}, {"payload", payload}};
  return j.dump();
}

WireMessage WireMessage::parse(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("frame is not a JSON object");
  if (!j.contains("seq") || !j["seq"].is_number_integer()) throw ProtocolError("frame needs an integer seq");
  if (!j.contains("kind") || !j["kind"].is_string()) throw ProtocolError("frame needs a kind");
  auto kind = kind_from_string(j["kind"].get<std::string>());
  if (!kind) throw ProtocolError("unknown kind '" + j["kind"].get<std::string>() + "'");
  WireMessage m;
  m.seq = j["seq"].get<std::int64_t>();
  m.kind = *kind;
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) throw ProtocolError("payload must be an object");
    m.payload = j["payload"];
  }
  if (j.contains("session") && j["session"].is_string()) m.session = j["session"].get<std::string>();
  return m;
}

}  // namespace rdg
