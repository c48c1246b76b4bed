#include "rdg/server/session_server.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rdg/resolver/parser.hpp"
#include "rdg/server/questionnaire.hpp"
#include "rdg/server/replay.hpp"
#include "rdg/util/errors.hpp"
#include "rdg/util/rng.hpp"

namespace rdg {

std::string_view to_string(Endpoint e) {
  switch (e) {
    case Endpoint::play: return "/play";
    case Endpoint::wizard: return "/wizard";
    case Endpoint::queue: return "/queue";
  }
  return "?";
}

namespace {

using nlohmann::json;

enum class ConnRole { none, director, matcher, wizard, screen };

constexpr std::string_view kDirector = "director";
constexpr std::string_view kMatcher = "matcher";
constexpr std::string_view kWizard = "wizard";
constexpr std::string_view kScreen = "screen";
constexpr std::size_t kMaxChat = 2000;

std::string require_string(const json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_string()) throw ProtocolError(std::string("payload needs string '") + key + "'");
  return it->get<std::string>();
}

std::optional<int> optional_int(const json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer()) throw ProtocolError(std::string("payload field '") + key + "' must be an integer");
  return it->get<int>();
}

bool valid_participant_id(std::string_view id) {
  return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

}  // namespace

struct SessionServer::Impl {
  struct Conn {
    ConnId id = 0;
    Endpoint endpoint = Endpoint::play;
    Transport transport;
    std::int64_t out_seq = 0;
    std::int64_t in_seq = 0;
    ConnRole role = ConnRole::none;
    ParticipantId participant;
    std::string session;  // screens and wizards
  };

  struct Participant {
    ParticipantId id;
    std::string token;
    SeatRole role = SeatRole::director;
    Variant variant = Variant::web;
    std::set<ConnId> conns;
    std::string session;  // current or last session
    bool socket_join = false;
    int last_position = 0;
  };

  struct Session {
    std::string id;
    Variant variant = Variant::web;
    MatcherKind kind = MatcherKind::autonomous;
    ParticipantId director;
    ParticipantId matcher;
    std::optional<ConnId> wizard;
    std::optional<GameState> game;
    std::unique_ptr<MatcherAgent> agent;
    std::set<ConnId> screens;
    bool started = false;
    bool ended = false;
    Millis start_at = 0;  // server time of START
    std::int64_t log_seq = 0;
    Millis next_tick = 0;  // session time
    std::optional<Millis> gaze_user_at;
    std::optional<Millis> gaze_screen_at;

    Millis ts(Millis now) const { return std::max<Millis>(0, now - start_at); }
    std::optional<Millis> next_due() const {
      if (!started || ended) return std::nullopt;
      Millis due = next_tick;
      if (gaze_user_at) due = std::min(due, *gaze_user_at);
      if (gaze_screen_at) due = std::min(due, *gaze_screen_at);
      return start_at + due;
    }
  };

  Impl(const WorldMap& m, const Repertoire& r, LogStore& l, MemoryStore* mem, ServerConfig c)
      : map(m), repertoire(r), logs(l), memory(mem), config(std::move(c)), parser(m), rng_state(config.seed) {}

  const WorldMap& map;
  const Repertoire& repertoire;
  LogStore& logs;
  MemoryStore* memory;
  ServerConfig config;
  DescriptionParser parser;

  mutable std::mutex mu;
  std::uint64_t rng_state;
  ConnId next_conn = 0;
  std::uint64_t session_counter = 0;
  std::uint64_t participant_counter = 0;
  std::map<ConnId, Conn> conns;
  std::map<ParticipantId, Participant> participants;
  std::map<std::string, ParticipantId> by_token;
  std::map<std::string, Session> sessions;
  std::set<ConnId> wizards;  // registered wizard consoles
  Matchmaker lobby;
  int autonomous_active = 0;

  // ---- delivery -----------------------------------------------------------

  void send(Conn& c, const std::string& session, Millis ts, MsgKind kind, json payload) {
    WireMessage m;
    m.seq = ++c.out_seq;
    m.session = session;
    m.ts = ts;
    m.kind = kind;
    m.payload = std::move(payload);
    if (c.transport.send) c.transport.send(m.to_text());
  }

  void send_error(Conn& c, const Error& e, std::int64_t ref_seq) {
    send(c, c.session, 0, MsgKind::ERROR, {{"code", e.code()}, {"message", e.what()}, {"ref", ref_seq}});
  }

  void drop(ConnId id) {
    auto it = conns.find(id);
    if (it == conns.end()) return;
    auto transport = it->second.transport;
    detach(it->second);
    conns.erase(it);
    if (transport.close) transport.close();
  }

  std::string token() {
    return fmt::format("{:016x}{:016x}", splitmix64(rng_state), splitmix64(rng_state));
  }

  std::vector<ConnId> play_conns(const ParticipantId& pid) const {
    std::vector<ConnId> out;
    auto it = participants.find(pid);
    if (it == participants.end()) return out;
    for (auto c : it->second.conns) {
      auto ci = conns.find(c);
      if (ci != conns.end() && ci->second.endpoint == Endpoint::play) out.push_back(c);
    }
    return out;
  }

  void send_lobby(const ParticipantId& pid, MsgKind kind, const json& payload) {
    auto it = participants.find(pid);
    if (it == participants.end()) return;
    for (auto c : it->second.conns) send(conns.at(c), "", 0, kind, payload);
  }

  std::vector<std::string> roles_all(const Session& s) const {
    std::vector<std::string> r{std::string(kDirector), std::string(kMatcher)};
    if (s.kind == MatcherKind::wizard) r.emplace_back(kWizard);
    r.emplace_back(kScreen);
    return r;
  }

  std::vector<std::string> roles(const Session& s, std::initializer_list<std::string_view> want) const {
    std::vector<std::string> r;
    for (auto w : want) {
      if (w == kWizard && s.kind != MatcherKind::wizard) continue;
      r.emplace_back(w);
    }
    return r;
  }

  /// Appends to the session log, then delivers.
  void emit(Session& s, Millis now, MsgKind kind, const std::string& from, const std::vector<std::string>& to,
            json payload) {
    LogEvent e;
    e.seq = ++s.log_seq;
    e.session = s.id;
    e.ts = s.ts(now);
    e.kind = kind;
    e.from = from;
    e.to = to;
    e.payload = payload;
    logs.append(s.id, e.to_json().dump());

    std::vector<ConnId> targets;
    for (const auto& role : to) {
      if (role == kDirector) {
        for (auto c : play_conns(s.director)) targets.push_back(c);
      } else if (role == kMatcher) {
        if (s.kind == MatcherKind::human)
          for (auto c : play_conns(s.matcher)) targets.push_back(c);
      } else if (role == kWizard) {
        if (s.wizard) targets.push_back(*s.wizard);
      } else if (role == kScreen) {
        targets.insert(targets.end(), s.screens.begin(), s.screens.end());
      }
    }
    for (auto c : targets) {
      auto it = conns.find(c);
      if (it != conns.end()) send(it->second, s.id, e.ts, kind, payload);
    }
  }

  json knowledge_json(const Session& s) const {
    json anchors = json::array();
    for (const auto& a : s.agent->knowledge().anchors()) anchors.push_back({{"label", a.label}, {"country", a.id}});
    return {{"known", s.agent->knowledge().known()}, {"learned", s.agent->knowledge().learned()}, {"anchors", anchors}};
  }

  // ---- lobby --------------------------------------------------------------

  JoinResult join(std::string_view role, Variant variant, std::optional<ParticipantId> pid, Millis now,
                  bool socket) {
    SeatRole seat;
    if (role == kDirector) {
      seat = SeatRole::director;
    } else if (role == kMatcher) {
      seat = SeatRole::matcher;
    } else {
      throw ArgumentError("queue role must be director or matcher");
    }
    if (pid && !valid_participant_id(*pid)) throw ArgumentError("invalid participant id");
    if (!pid) pid = fmt::format("p{:04}", ++participant_counter);
    auto it = participants.find(*pid);
    if (it != participants.end()) {
      if (lobby.queued(*pid)) throw QueueError("participant '" + *pid + "' is already queued");
      auto si = sessions.find(it->second.session);
      if (si != sessions.end() && !si->second.ended)
        throw QueueError("participant '" + *pid + "' is already in a session");
      by_token.erase(it->second.token);
    }
    auto& p = participants[*pid];
    p.id = *pid;
    p.role = seat;
    p.variant = variant;
    p.token = token();
    p.session.clear();
    p.socket_join = socket;
    by_token[p.token] = p.id;
    const int pos = lobby.enqueue(p.id, seat, variant, now);
    p.last_position = pos;
    return {p.id, p.token, pos};
  }

  void push_positions() {
    for (const auto& e : lobby.entries()) {
      auto& p = participants.at(e.participant);
      const int pos = lobby.position(p.id);
      if (pos != p.last_position) {
        p.last_position = pos;
        send_lobby(p.id, MsgKind::QUEUE_POS, {{"position", pos}, {"variant", to_string(p.variant)}});
      }
    }
  }

  std::optional<ConnId> free_wizard() const {
    for (auto w : wizards) {
      if (conns.at(w).session.empty()) return w;
    }
    return std::nullopt;
  }

  void try_pair(Millis now) {
    while (auto pairing = lobby.pair(free_wizard().has_value(), autonomous_active < config.autonomous_pool)) {
      create_session(*pairing, now);
    }
    push_positions();
  }

  void create_session(const Pairing& p, Millis now) {
    Session s;
    s.id = fmt::format("{}{:04}", config.session_prefix, ++session_counter);
    s.variant = p.director.variant;
    s.kind = p.matcher_kind;
    s.director = p.director.participant;
    s.matcher = p.human ? p.human->participant : "agent-" + s.id;
    const std::uint64_t seed = splitmix64(rng_state);
    s.game = GameState::new_game(s.variant, s.director, s.matcher, seed, map);
    if (s.kind != MatcherKind::human) {
      auto init = init_knowledge(s.variant, s.director, memory);
      if (init.warning) spdlog::warn("session {}: {}", s.id, *init.warning);
      s.agent = std::make_unique<MatcherAgent>(map, parser, repertoire, s.variant, std::move(init.knowledge),
                                               config.agent);
    }
    if (s.kind == MatcherKind::wizard) {
      s.wizard = free_wizard();
      conns.at(*s.wizard).session = s.id;
    }
    if (s.kind == MatcherKind::autonomous) ++autonomous_active;
    participants.at(s.director).session = s.id;
    if (p.human) participants.at(s.matcher).session = s.id;
    auto [it, ok] = sessions.emplace(s.id, std::move(s));
    Session& ses = it->second;

    const json base = {{"session", ses.id}, {"variant", to_string(ses.variant)},
                       {"matcher_kind", to_string(ses.kind)}};
    auto with_role = [&](std::string_view role) {
      json j = base;
      j["role"] = role;
      return j;
    };
    send_lobby(ses.director, MsgKind::PAIRED, with_role(kDirector));
    if (p.human) send_lobby(ses.matcher, MsgKind::PAIRED, with_role(kMatcher));
    if (ses.wizard) {
      json j = with_role(kWizard);
      j["director"] = ses.director;
      j["knowledge"] = knowledge_json(ses);
      send(conns.at(*ses.wizard), ses.id, 0, MsgKind::PAIRED, j);
    }
    spdlog::info("paired {} ({}, {} matcher) director={}", ses.id, to_string(ses.variant), to_string(ses.kind),
                 ses.director);
    maybe_start(ses, now);
  }

  void maybe_start(Session& s, Millis now) {
    if (s.started) return;
    if (play_conns(s.director).empty()) return;
    if (s.kind == MatcherKind::human && play_conns(s.matcher).empty()) return;
    s.started = true;
    s.start_at = now;

    LogHeader h;
    h.session = s.id;
    h.variant = s.variant;
    h.map_version = map.version();
    h.seed = s.game->seed();
    h.director = s.director;
    h.matcher = s.matcher;
    h.matcher_kind = std::string(to_string(s.kind));
    h.repertoire_version = repertoire.version();
    logs.append(s.id, h.to_json().dump());

    s.game->start(0);
    s.next_tick = std::min<Millis>(config.timer_interval_ms, s.game->deadline());
    emit(s, now, MsgKind::START, "server", roles_all(s),
         {{"variant", to_string(s.variant)},
          {"time_limit_ms", kGameDurationMs},
          {"map_version", map.version()},
          {"matcher_kind", to_string(s.kind)}});
    emit_target(s, now);
    emit(s, now, MsgKind::TIMER, "server", roles_all(s), {{"remaining_s", s.game->clock_seconds()}});
    if (s.agent && s.kind == MatcherKind::wizard) {
      emit(s, now, MsgKind::KNOWLEDGE, "server", roles(s, {kWizard}), knowledge_json(s));
    }
    if (s.kind == MatcherKind::autonomous) emit_utterance(s, now, s.agent->utter("open_1", "opening"));
  }

  void emit_target(Session& s, Millis now) {
    if (s.game->phase() != Phase::running || !s.game->target()) return;
    emit(s, now, MsgKind::TARGET, "server", roles(s, {kDirector, kWizard}),
         {{"country", *s.game->target()}, {"episode", s.game->episode()}});
  }

  void emit_utterance(Session& s, Millis now, const AgentUtterance& u) {
    emit(s, now, MsgKind::UTTERANCE, s.matcher, roles_all(s), u.to_json());
    if (u.expression) {
      json j = u.expression->to_json();
      j["button"] = u.button;
      emit(s, now, MsgKind::EMBODIMENT, s.matcher, roles_all(s), j);
    }
  }

  void emit_effects(Session& s, Millis now, const AgentEffects& fx, std::string_view rule) {
    for (const auto& ev : fx.embodiment) {
      if (ev.kind == EmbodimentEvent::Kind::expression) continue;  // sent with its utterance
      json j = ev.to_json();
      j["rule"] = rule;
      emit(s, now, MsgKind::EMBODIMENT, s.matcher, roles_all(s), j);
    }
    for (const auto& u : fx.utterances) emit_utterance(s, now, u);
    if (!fx.learned.empty() && s.kind == MatcherKind::wizard) {
      emit(s, now, MsgKind::KNOWLEDGE, "server", roles(s, {kWizard}), knowledge_json(s));
    }
  }

  void after_outcome(Session& s, Millis now, const SelectionOutcome& out, int episode) {
    if (out.scored > 0 || out.advanced) {
      json j = {{"scored", out.scored}, {"score", s.game->score()}, {"episode", episode}, {"correct", out.correct}};
      if (out.guess) j["guess"] = out.guess;
      emit(s, now, MsgKind::SCORE, "server", roles_all(s), j);
    }
  }

  void finish_if_over(Session& s, Millis now) {
    if (s.ended || s.game->phase() != Phase::finished) return;
    s.ended = true;
    s.gaze_user_at.reset();
    s.gaze_screen_at.reset();
    emit(s, now, MsgKind::END, "server", roles_all(s),
         {{"score", s.game->score()},
          {"served", s.game->served_targets().size()},
          {"resolved", s.game->resolved_count()},
          {"reason", s.game->expired_by_clock() ? "clock" : "pool"}});
    if (s.agent && memory) {
      try {
        memory->remember(s.director, s.agent->knowledge().learned());
      } catch (const StorageError& e) {
        spdlog::warn("session {}: could not persist memory: {}", s.id, e.what());
      }
    }
    if (s.kind == MatcherKind::autonomous) --autonomous_active;
    if (s.wizard) {
      auto it = conns.find(*s.wizard);
      if (it != conns.end()) it->second.session.clear();
    }
    spdlog::info("session {} ended: score {} over {} targets", s.id, s.game->score(), s.game->resolved_count());
    try_pair(now);
  }

  // ---- game actions -------------------------------------------------------

  enum class SelectVia { human, wizard, autonomous };

  void do_select(Session& s, Millis now, const std::string& country, std::optional<int> episode, SelectVia via,
                 const std::string& rule) {
    const int ep = s.game->episode();
    const Millis ts = s.ts(now);
    AgentEffects fx;
    SelectionOutcome out;
    if (via == SelectVia::human) {
      out = s.game->select_at(ts, s.matcher, country, episode);
    } else if (via == SelectVia::wizard) {
      out = s.agent->wizard_select(*s.game, true, country, ts, episode, fx);
    } else {
      out = s.agent->select(*s.game, country, ts, episode, fx);
    }
    json j = {{"country", country}, {"episode", ep}};
    if (via != SelectVia::human) j["by"] = via == SelectVia::wizard ? "wizard" : "policy";
    if (!rule.empty()) j["rule"] = rule;
    emit(s, now, MsgKind::SELECT, s.matcher, roles(s, {kMatcher, kWizard}), j);
    if (s.variant == Variant::embodied) {
      emit(s, now, MsgKind::SELECTION_SHOWN, "server", roles_all(s),
           {{"country", country}, {"episode", ep}, {"guess", out.guess}, {"correct", out.correct}});
    }
    after_outcome(s, now, out, ep);
    emit_effects(s, now, fx, via == SelectVia::wizard ? "wizard_select" : "policy_select");
    if (out.advanced) emit_target(s, now);
    finish_if_over(s, now);
  }

  void do_request_next(Session& s, Millis now) {
    const int ep = s.game->episode();
    auto out = s.game->request_next_at(s.ts(now), s.director);
    emit(s, now, MsgKind::REQUEST_NEXT, s.director, roles(s, {kDirector, kMatcher, kWizard}), {{"episode", ep}});
    after_outcome(s, now, out, ep);
    if (s.agent) emit_effects(s, now, s.agent->on_outcome(out), "outcome");
    emit_target(s, now);
    finish_if_over(s, now);
  }

  void run_policy(Session& s, Millis now, const std::string& text) {
    for (const auto& a : s.agent->autonomous_step(text)) {
      if (s.ended) return;
      try {
        if (a.kind == AgentAction::Kind::select) {
          do_select(s, now, a.country, s.game->episode(), SelectVia::autonomous, a.rule);
        } else if (a.kind == AgentAction::Kind::utter) {
          emit_utterance(s, now, s.agent->utter(a.button, a.rule));
        }
      } catch (const Error& e) {
        spdlog::warn("session {}: policy action {} failed: {}", s.id, a.rule, e.what());
      }
    }
  }

  // ---- inbound ------------------------------------------------------------

  Session& session_of(const Conn& c) {
    std::string sid;
    if (c.role == ConnRole::director || c.role == ConnRole::matcher) {
      sid = participants.at(c.participant).session;
    } else {
      sid = c.session;
    }
    auto it = sessions.find(sid);
    if (it == sessions.end()) throw StateError("not in a session");
    return it->second;
  }

  Session& running_session(const Conn& c) {
    auto& s = session_of(c);
    if (!s.started) throw StateError("game has not started");
    if (s.ended) throw StateError("game is over");
    return s;
  }

  void handle(Conn& c, const WireMessage& m, Millis now) {
    if (m.kind == MsgKind::JOIN) return handle_join(c, m, now);
    switch (c.role) {
      case ConnRole::none: throw AuthError("send JOIN first");
      case ConnRole::screen: throw RoleError("shared screens are receive-only");
      case ConnRole::wizard: return handle_wizard(c, m, now);
      case ConnRole::director:
      case ConnRole::matcher: return handle_player(c, m, now);
    }
  }

  void handle_join(Conn& c, const WireMessage& m, Millis now) {
    if (c.role != ConnRole::none) throw StateError("already joined");
    const auto& p = m.payload;
    if (c.endpoint == Endpoint::queue) {
      const auto role = require_string(p, "role");
      const auto variant = variant_from_string(require_string(p, "variant"));
      std::optional<ParticipantId> pid;
      if (p.contains("participant")) pid = require_string(p, "participant");
      auto r = join(role, variant, pid, now, true);
      auto& part = participants.at(r.participant);
      part.conns.insert(c.id);
      c.participant = r.participant;
      c.role = part.role == SeatRole::director ? ConnRole::director : ConnRole::matcher;
      send(c, "", 0, MsgKind::JOIN, {{"participant", r.participant}, {"token", r.token}});
      send(c, "", 0, MsgKind::QUEUE_POS, {{"position", r.position}, {"variant", to_string(variant)}});
      try_pair(now);
      return;
    }
    if (c.endpoint == Endpoint::wizard) {
      if (require_string(p, "role") != kWizard) throw RoleError("the console endpoint only accepts wizards");
      c.role = ConnRole::wizard;
      wizards.insert(c.id);
      if (p.contains("session")) {
        // Re-attach to a running wizard session whose console dropped.
        auto it = sessions.find(require_string(p, "session"));
        if (it == sessions.end() || it->second.kind != MatcherKind::wizard || it->second.ended)
          throw NotFoundError("no wizard session to resume");
        if (it->second.wizard && conns.contains(*it->second.wizard)) throw StateError("session already has a wizard");
        it->second.wizard = c.id;
        c.session = it->first;
      }
      send(c, c.session, 0, MsgKind::JOIN, {{"role", kWizard}, {"session", c.session}});
      if (c.session.empty()) try_pair(now);
      return;
    }
    // /play
    if (p.contains("token")) {
      auto t = by_token.find(require_string(p, "token"));
      if (t == by_token.end()) throw AuthError("unknown token");
      auto& part = participants.at(t->second);
      part.conns.insert(c.id);
      c.participant = part.id;
      c.role = part.role == SeatRole::director ? ConnRole::director : ConnRole::matcher;
      json reply = {{"participant", part.id}, {"role", c.role == ConnRole::director ? kDirector : kMatcher},
                    {"session", part.session}};
      auto si = sessions.find(part.session);
      if (si != sessions.end() && si->second.started) {
        const auto& g = *si->second.game;
        reply["state"] = {{"phase", to_string(g.phase())}, {"score", g.score()}, {"episode", g.episode()},
                          {"remaining_s", g.clock_seconds()}};
        if (c.role == ConnRole::director && g.target()) reply["state"]["target"] = *g.target();
      } else if (lobby.queued(part.id)) {
        reply["position"] = lobby.position(part.id);
      }
      send(c, part.session, 0, MsgKind::JOIN, reply);
      if (si != sessions.end()) maybe_start(si->second, now);
      return;
    }
    const auto role = require_string(p, "role");
    if (role != "shared_screen") throw RoleError("/play JOIN needs a token or role shared_screen");
    auto it = sessions.find(require_string(p, "session"));
    if (it == sessions.end()) throw NotFoundError("no such session");
    c.role = ConnRole::screen;
    c.session = it->first;
    it->second.screens.insert(c.id);
    send(c, c.session, 0, MsgKind::JOIN, {{"role", "shared_screen"}, {"session", c.session}});
  }

  void handle_player(Conn& c, const WireMessage& m, Millis now) {
    const bool director = c.role == ConnRole::director;
    if (c.endpoint != Endpoint::play) throw RoleError("game traffic belongs on /play");
    switch (m.kind) {
      case MsgKind::QUESTIONNAIRE: {
        auto& s = session_of(c);
        store_questionnaire(s, director ? kDirector : kMatcher, c.participant, m.payload.value("answers", json()));
        send(c, s.id, 0, MsgKind::QUESTIONNAIRE, {{"stored", true}});
        return;
      }
      case MsgKind::CHAT: {
        auto text = require_string(m.payload, "text");
        if (text.empty() || text.size() > kMaxChat) throw ValidationError("chat text must be 1..2000 bytes");
        auto& s = running_session(c);
        emit(s, now, MsgKind::CHAT, c.participant, roles_all(s),
             {{"text", text}, {"role", director ? kDirector : kMatcher}});
        if (director && s.agent) {
          if (s.variant == Variant::embodied) {
            s.gaze_user_at = s.ts(now) + config.agent.silence_gaze_ms;
            s.gaze_screen_at.reset();
          }
          if (s.kind == MatcherKind::autonomous) run_policy(s, now, text);
        }
        return;
      }
      case MsgKind::HOVER: {
        auto country = require_string(m.payload, "country");
        if (!map.contains(country)) throw NotFoundError("unknown country '" + country + "'");
        auto& s = running_session(c);
        emit(s, now, MsgKind::HOVER, c.participant, roles(s, {kWizard}),
             {{"country", country}, {"role", director ? kDirector : kMatcher}});
        return;
      }
      case MsgKind::REQUEST_NEXT: {
        if (!director) throw RoleError("only the director may request the next target");
        do_request_next(running_session(c), now);
        return;
      }
      case MsgKind::SELECT: {
        if (director) throw RoleError("only the matcher may select");
        auto country = require_string(m.payload, "country");
        auto episode = optional_int(m.payload, "episode");
        do_select(running_session(c), now, country, episode, SelectVia::human, "");
        return;
      }
      default: throw RoleError(fmt::format("{} may not send {}", director ? kDirector : kMatcher, to_string(m.kind)));
    }
  }

  void handle_wizard(Conn& c, const WireMessage& m, Millis now) {
    switch (m.kind) {
      case MsgKind::SELECT: {
        auto country = require_string(m.payload, "country");
        auto episode = optional_int(m.payload, "episode");
        do_select(running_session(c), now, country, episode, SelectVia::wizard, "");
        return;
      }
      case MsgKind::UTTERANCE: {
        auto& s = running_session(c);
        emit_utterance(s, now, s.agent->utter(require_string(m.payload, "button")));
        return;
      }
      case MsgKind::EMBODIMENT: {
        auto& s = running_session(c);
        if (s.variant != Variant::embodied) throw UnsupportedError("embodiment events are EMBODIED-only");
        auto ev = EmbodimentEvent::from_json(m.payload);
        json j = ev.to_json();
        j["rule"] = "wizard";
        emit(s, now, MsgKind::EMBODIMENT, s.matcher, roles_all(s), j);
        return;
      }
      case MsgKind::ANCHOR: {
        auto& s = running_session(c);
        auto label = require_string(m.payload, "label");
        auto country = require_string(m.payload, "country");
        s.agent->add_anchor(label, country);
        emit(s, now, MsgKind::ANCHOR, "wizard", roles(s, {kWizard}), {{"label", label}, {"country", country}});
        emit(s, now, MsgKind::KNOWLEDGE, "server", roles(s, {kWizard}), knowledge_json(s));
        return;
      }
      default: throw RoleError(fmt::format("wizard may not send {}", to_string(m.kind)));
    }
  }

  void store_questionnaire(Session& s, std::string_view role, const ParticipantId& who, const json& answers) {
    if (!s.ended) throw StateError("questionnaires open after the game ends");
    validate_questionnaire(answers);
    json rec = {{"session", s.id}, {"role", role}, {"participant", who}, {"answers", answers}};
    if (!logs.put_once(questionnaire_name(s.id, std::string(role)), rec.dump(2) + "\n"))
      throw StateError("questionnaire already submitted");
  }

  // ---- timers -------------------------------------------------------------

  Session* earliest(Millis limit, bool inclusive) {
    Session* best = nullptr;
    Millis best_due = 0;
    for (auto& [id, s] : sessions) {
      auto due = s.next_due();
      if (!due) continue;
      if (inclusive ? *due > limit : *due >= limit) continue;
      if (!best || *due < best_due) {
        best = &s;
        best_due = *due;
      }
    }
    return best;
  }

  void fire(Session& s) {
    const Millis due_ts = *s.next_due() - s.start_at;
    const Millis now = s.start_at + due_ts;
    if (s.gaze_user_at && *s.gaze_user_at == due_ts) {
      s.gaze_user_at.reset();
      s.gaze_screen_at = due_ts + config.agent.gaze_user_ms;
      json j = EmbodimentEvent::gaze_user().to_json();
      j["rule"] = "thinking_pause";
      emit(s, now, MsgKind::EMBODIMENT, s.matcher, roles_all(s), j);
      return;
    }
    if (s.gaze_screen_at && *s.gaze_screen_at == due_ts) {
      s.gaze_screen_at.reset();
      json j = EmbodimentEvent::gaze_screen().to_json();
      j["rule"] = "gaze_return";
      emit(s, now, MsgKind::EMBODIMENT, s.matcher, roles_all(s), j);
      return;
    }
    s.game->tick(due_ts);
    emit(s, now, MsgKind::TIMER, "server", roles_all(s), {{"remaining_s", s.game->clock_seconds()}});
    s.next_tick = std::min(s.next_tick + config.timer_interval_ms, s.game->deadline());
    finish_if_over(s, now);
  }

  void fire_until(Millis limit, bool inclusive) {
    while (auto* s = earliest(limit, inclusive)) fire(*s);
  }

  // ---- connections --------------------------------------------------------

  void detach(Conn& c) {
    if (c.role == ConnRole::wizard) {
      wizards.erase(c.id);
      auto it = sessions.find(c.session);
      if (it != sessions.end() && it->second.wizard == c.id) it->second.wizard.reset();
    } else if (c.role == ConnRole::screen) {
      auto it = sessions.find(c.session);
      if (it != sessions.end()) it->second.screens.erase(c.id);
    } else if (!c.participant.empty()) {
      auto pit = participants.find(c.participant);
      if (pit != participants.end()) {
        pit->second.conns.erase(c.id);
        if (pit->second.conns.empty() && pit->second.socket_join && lobby.remove(pit->second.id)) push_positions();
      }
    }
  }
};

SessionServer::SessionServer(const WorldMap& map, const Repertoire& repertoire, LogStore& logs, MemoryStore* memory,
                             ServerConfig config)
    : impl_(std::make_unique<Impl>(map, repertoire, logs, memory, std::move(config))) {}

SessionServer::~SessionServer() = default;

ConnId SessionServer::connect(Endpoint endpoint, Transport transport, Millis now) {
  std::lock_guard lock(impl_->mu);
  impl_->fire_until(now, false);
  const ConnId id = ++impl_->next_conn;
  auto& c = impl_->conns[id];
  c.id = id;
  c.endpoint = endpoint;
  c.transport = std::move(transport);
  return id;
}

void SessionServer::receive(ConnId conn, std::string_view text, Millis now) {
  std::lock_guard lock(impl_->mu);
  impl_->fire_until(now, false);
  auto it = impl_->conns.find(conn);
  if (it == impl_->conns.end()) return;
  auto& c = it->second;
  WireMessage m;
  try {
    m = WireMessage::parse(text);
  } catch (const ProtocolError& e) {
    impl_->send_error(c, e, 0);
    impl_->drop(conn);
    return;
  }
  if (m.seq != c.in_seq + 1) {
    impl_->send_error(c, SeqError("expected seq " + std::to_string(c.in_seq + 1)), m.seq);
    return;
  }
  c.in_seq = m.seq;
  try {
    impl_->handle(c, m, now);
  } catch (const ProtocolError& e) {
    impl_->send_error(c, e, m.seq);
    impl_->drop(conn);
  } catch (const Error& e) {
    impl_->send_error(c, e, m.seq);
  }
}

void SessionServer::disconnect(ConnId conn, Millis now) {
  std::lock_guard lock(impl_->mu);
  impl_->fire_until(now, false);
  auto it = impl_->conns.find(conn);
  if (it == impl_->conns.end()) return;
  impl_->detach(it->second);
  impl_->conns.erase(it);
}

void SessionServer::advance(Millis now) {
  std::lock_guard lock(impl_->mu);
  impl_->fire_until(now, true);
}

std::optional<Millis> SessionServer::next_timer() const {
  std::lock_guard lock(impl_->mu);
  std::optional<Millis> best;
  for (const auto& [id, s] : impl_->sessions) {
    auto due = s.next_due();
    if (due && (!best || *due < *best)) best = due;
  }
  return best;
}

JoinResult SessionServer::join(std::string_view role, Variant variant, std::optional<ParticipantId> participant,
                               Millis now) {
  std::lock_guard lock(impl_->mu);
  impl_->fire_until(now, false);
  auto r = impl_->join(role, variant, std::move(participant), now, false);
  impl_->try_pair(now);
  return r;
}

void SessionServer::submit_questionnaire(std::string_view token, const nlohmann::json& answers) {
  std::lock_guard lock(impl_->mu);
  auto t = impl_->by_token.find(std::string(token));
  if (t == impl_->by_token.end()) throw AuthError("unknown token");
  const auto& p = impl_->participants.at(t->second);
  auto it = impl_->sessions.find(p.session);
  if (it == impl_->sessions.end()) throw StateError("participant has not played");
  impl_->store_questionnaire(it->second, p.role == SeatRole::director ? kDirector : kMatcher, p.id, answers);
}

std::vector<SessionSummary> SessionServer::sessions() const {
  std::lock_guard lock(impl_->mu);
  std::vector<SessionSummary> out;
  for (const auto& [id, s] : impl_->sessions) {
    out.push_back({s.id, s.variant, s.game->phase(), s.kind, s.director, s.matcher, s.game->score(),
                   static_cast<int>(s.game->served_targets().size()), s.game->resolved_count(), s.ended});
  }
  return out;
}

std::optional<SessionSummary> SessionServer::session(std::string_view id) const {
  for (auto& s : sessions()) {
    if (s.id == id) return s;
  }
  return std::nullopt;
}

nlohmann::json SessionServer::replay_summary(std::string_view id) const {
  std::string text;
  {
    std::lock_guard lock(impl_->mu);
    text = impl_->logs.read(std::string(id));
  }
  auto log = SessionLog::parse(text);
  auto g = replay(log, impl_->map);
  return {{"session", log.header.session},
          {"variant", to_string(log.header.variant)},
          {"phase", to_string(g.phase())},
          {"score", g.score()},
          {"served", g.served_targets()},
          {"resolved", g.resolved_count()},
          {"events", log.events.size()}};
}

const WorldMap& SessionServer::map() const { return impl_->map; }
const Repertoire& SessionServer::repertoire() const { return impl_->repertoire; }

}  // namespace rdg
