#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdg/agent/knowledge.hpp"
#include "rdg/agent/matcher_agent.hpp"
#include "rdg/agent/repertoire.hpp"
#include "rdg/server/matchmaker.hpp"
#include "rdg/server/session_log.hpp"

namespace rdg {

enum class Endpoint { play, wizard, queue };
std::string_view to_string(Endpoint e);

using ConnId = std::uint64_t;

/// How the server reaches one client connection. Both callbacks are invoked
/// with the server lock held and must not call back into the server.
struct Transport {
  std::function<void(const std::string&)> send;
  std::function<void()> close;
};

struct ServerConfig {
  std::uint64_t seed = 1;           // session seeds and tokens
  std::string session_prefix = "s";
  Millis timer_interval_ms = 10'000;
  int autonomous_pool = 0;          // concurrent autonomous-agent sessions
  AgentConfig agent;
};

struct JoinResult {
  ParticipantId participant;
  std::string token;
  int position = 0;
};

struct SessionSummary {
  std::string id;
  Variant variant = Variant::web;
  Phase phase = Phase::lobby;
  MatcherKind matcher_kind = MatcherKind::autonomous;
  ParticipantId director;
  ParticipantId matcher;
  int score = 0;
  int served = 0;
  int resolved = 0;
  bool ended = false;
};

/// Lobby, sessions and wire protocol, independent of the network layer.
///
/// Time is supplied by the caller in server milliseconds; message handling
/// and timers for all sessions run on one serialized executor. At equal
/// times, inbound messages are handled before timers fire.
class SessionServer {
 public:
  SessionServer(const WorldMap& map, const Repertoire& repertoire, LogStore& logs, MemoryStore* memory,
                ServerConfig config = {});
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  ConnId connect(Endpoint endpoint, Transport transport, Millis now);
  void receive(ConnId conn, std::string_view text, Millis now);
  void disconnect(ConnId conn, Millis now);

  /// Fires every timer due at or before `now`.
  void advance(Millis now);
  std::optional<Millis> next_timer() const;

  /// Lobby entry without a socket; the client then attaches on /play.
  JoinResult join(std::string_view role, Variant variant, std::optional<ParticipantId> participant, Millis now);
  /// Stores post-game answers for the participant holding `token`.
  void submit_questionnaire(std::string_view token, const nlohmann::json& answers);

  std::vector<SessionSummary> sessions() const;
  std::optional<SessionSummary> session(std::string_view id) const;
  /// Replays a stored log and reports the reconstructed outcome.
  nlohmann::json replay_summary(std::string_view id) const;

  const WorldMap& map() const;
  const Repertoire& repertoire() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rdg
