#include <doctest.h>

#include <deque>
#include <random>
#include <memory>

#include <nlohmann/json.hpp>

#include "rdg/server/matchmaker.hpp"
#include "rdg/server/questionnaire.hpp"
#include "rdg/server/replay.hpp"
#include "rdg/server/session_log.hpp"
#include "rdg/server/session_server.hpp"
#include "rdg/server/wire.hpp"
#include "rdg/util/errors.hpp"
#include "support.hpp"

using namespace rdg;
using nlohmann::json;
using rdg::test::repertoire;
using rdg::test::world;

namespace {

// Kinds that belong to a session and must hit the log before the wire.
bool logged_kind(const std::string& k) {
  return k != "JOIN" && k != "QUEUE_POS" && k != "PAIRED" && k != "ERROR" && k != "QUESTIONNAIRE";
}

struct Client {
  ConnId id = 0;
  std::vector<json> in;
  bool closed = false;
  std::int64_t seq = 0;

  int count(std::string_view kind) const {
    int n = 0;
    for (const auto& m : in) n += m["kind"] == kind;
    return n;
  }
  const json* last(std::string_view kind) const {
    for (auto it = in.rbegin(); it != in.rend(); ++it)
      if ((*it)["kind"] == kind) return &*it;
    return nullptr;
  }
};

struct Harness {
  MemoryLogStore logs;
  InMemoryStore memory;
  SessionServer server;
  std::deque<Client> clients;
  Millis now = 0;
  int write_ahead_violations = 0;

  explicit Harness(ServerConfig cfg = {}) : server(world(), repertoire(), logs, &memory, cfg) {}

  Client& connect(Endpoint e) {
    auto& c = clients.emplace_back();
    Transport t;
    t.send = [this, &c](const std::string& text) {
      auto m = json::parse(text);
      if (!m["session"].get<std::string>().empty() && logged_kind(m["kind"])) check_logged(m);
      c.in.push_back(std::move(m));
    };
    t.close = [&c] { c.closed = true; };
    c.id = server.connect(e, t, now);
    return c;
  }

  // The same event must already be in the session log.
  void check_logged(const json& m) {
    auto log = SessionLog::parse(logs.read(m["session"]));
    for (const auto& e : log.events)
      if (to_string(e.kind) == m["kind"].get<std::string>() && e.ts == m["ts"] && e.payload == m["payload"]) return;
    ++write_ahead_violations;
  }

  void send(Client& c, std::string_view kind, json payload = json::object()) {
    json f = {{"seq", ++c.seq}, {"kind", kind}, {"payload", std::move(payload)}};
    server.receive(c.id, f.dump(), now);
  }

  // Queue socket plus play socket for one participant.
  std::pair<Client*, Client*> player(std::string_view role, std::string_view variant) {
    auto& q = connect(Endpoint::queue);
    send(q, "JOIN", {{"role", role}, {"variant", variant}});
    REQUIRE(q.last("JOIN"));
    const auto token = (*q.last("JOIN"))["payload"]["token"].get<std::string>();
    auto& p = connect(Endpoint::play);
    send(p, "JOIN", {{"token", token}});
    return {&q, &p};
  }
};

json target_of(const Client& c) { return (*c.last("TARGET"))["payload"]; }

}  // namespace

TEST_SUITE("wire") {
  TEST_CASE("frames round-trip") {
    WireMessage m;
    m.seq = 7;
    m.session = "s0001";
    m.ts = 1200;
    m.kind = MsgKind::SELECT;
    m.payload = {{"country", "FRA"}};
    auto back = WireMessage::parse(m.to_text());
    CHECK(back.seq == 7);
    CHECK(back.kind == MsgKind::SELECT);
    CHECK(back.payload == m.payload);
  }

  TEST_CASE("malformed frames raise ProtocolError") {
    CHECK_THROWS_AS(WireMessage::parse("nope"), ProtocolError);
    CHECK_THROWS_AS(WireMessage::parse(R"({"kind":"CHAT"})"), ProtocolError);
    CHECK_THROWS_AS(WireMessage::parse(R"({"seq":1,"kind":"DANCE"})"), ProtocolError);
    CHECK_THROWS_AS(WireMessage::parse(R"({"seq":1,"kind":"CHAT","payload":[1]})"), ProtocolError);
  }

  TEST_CASE("every kind name maps back") {
    for (int k = 0; k <= static_cast<int>(MsgKind::KNOWLEDGE); ++k)
      CHECK(kind_from_string(to_string(static_cast<MsgKind>(k))) == static_cast<MsgKind>(k));
  }
}

TEST_SUITE("matchmaker") {
  TEST_CASE("pairs in enqueue order with per-line positions") {
    Matchmaker mm;
    CHECK(mm.enqueue("a", SeatRole::director, Variant::web, 0) == 1);
    CHECK(mm.enqueue("b", SeatRole::director, Variant::embodied, 1) == 1);
    CHECK(mm.enqueue("c", SeatRole::director, Variant::web, 2) == 2);
    CHECK_THROWS_AS(mm.enqueue("a", SeatRole::director, Variant::web, 3), QueueError);
    CHECK_FALSE(mm.pair(false, false).has_value());
    auto p = mm.pair(false, true);
    REQUIRE(p);
    CHECK(p->director.participant == "a");
    CHECK(p->matcher_kind == MatcherKind::autonomous);
    CHECK(mm.position("c") == 1);
    CHECK(mm.pair(true, false)->director.participant == "b");
    CHECK(mm.pair(true, false)->matcher_kind == MatcherKind::wizard);
    CHECK(mm.entries().empty());
  }

  TEST_CASE("a queued human matcher of the same variant comes first") {
    Matchmaker mm;
    mm.enqueue("d", SeatRole::director, Variant::embodied, 0);
    mm.enqueue("m1", SeatRole::matcher, Variant::web, 0);
    CHECK_FALSE(mm.pair(false, false).has_value());
    mm.enqueue("m2", SeatRole::matcher, Variant::embodied, 0);
    auto p = mm.pair(true, true);
    REQUIRE(p);
    CHECK(p->matcher_kind == MatcherKind::human);
    CHECK(p->human->participant == "m2");
  }

  TEST_CASE("FIFO holds over random arrivals") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
      Matchmaker mm;
      std::vector<ParticipantId> order, paired;
      int next = 0;
      for (int step = 0; step < 40; ++step) {
        if (rng() % 3) {
          order.push_back("p" + std::to_string(next++));
          mm.enqueue(order.back(), SeatRole::director, Variant::web, step);
        } else if (auto p = mm.pair(false, true)) {
          paired.push_back(p->director.participant);
        }
      }
      while (auto p = mm.pair(false, true)) paired.push_back(p->director.participant);
      CHECK(paired == order);
    }
  }
}

TEST_SUITE("session server") {
  TEST_CASE("human WEB game: visibility, roles, scoring and end") {
    Harness h;
    auto [dq, d] = h.player("director", "WEB");
    auto [mq, m] = h.player("matcher", "WEB");
    CHECK((*dq->last("PAIRED"))["payload"]["matcher_kind"] == "human");
    REQUIRE(d->last("START"));
    REQUIRE(d->last("TARGET"));
    CHECK(m->count("TARGET") == 0);
    const auto target = target_of(*d)["country"].get<std::string>();

    h.now = 1000;
    h.send(*m, "SELECT", {{"country", target}, {"episode", 1}});
    CHECK(d->count("SELECT") == 0);
    CHECK(m->count("SELECT") == 1);
    CHECK(d->count("SELECTION_SHOWN") == 0);

    h.send(*d, "SELECT", {{"country", target}});
    REQUIRE(d->last("ERROR"));
    CHECK((*d->last("ERROR"))["payload"]["code"] == "role");
    h.send(*m, "REQUEST_NEXT");
    CHECK((*m->last("ERROR"))["payload"]["code"] == "role");

    h.send(*d, "CHAT", {{"text", "next one"}});
    CHECK(m->count("CHAT") == 1);
    h.send(*d, "REQUEST_NEXT");
    REQUIRE(d->last("SCORE"));
    CHECK((*d->last("SCORE"))["payload"]["score"] == 1);
    CHECK(m->count("TARGET") == 0);

    h.send(*m, "QUESTIONNAIRE", {{"answers", {{"fun", 5}}}});
    CHECK((*m->last("ERROR"))["payload"]["code"] == "state");

    h.now = 600'000;
    h.server.advance(h.now);
    REQUIRE(d->last("END"));
    CHECK((*d->last("END"))["payload"]["reason"] == "clock");
    CHECK(m->last("END"));

    h.send(*m, "QUESTIONNAIRE", {{"answers", {{"fun", 5}, {"comment", "nice"}}}});
    CHECK(m->last("QUESTIONNAIRE"));
    h.send(*m, "QUESTIONNAIRE", {{"answers", {{"fun", 4}}}});
    CHECK((*m->last("ERROR"))["payload"]["code"] == "state");
    h.send(*d, "QUESTIONNAIRE", {{"answers", {{"fun", 9}}}});
    CHECK((*d->last("ERROR"))["payload"]["code"] == "validation");

    const auto sid = (*d->last("START"))["session"].get<std::string>();
    auto summary = h.server.replay_summary(sid);
    CHECK(summary["score"] == 1);
    CHECK(summary["phase"] == "FINISHED");
    CHECK(h.server.session(sid)->score == 1);
    CHECK(h.write_ahead_violations == 0);

    // TIMER every 10 s plus the start tick.
    CHECK(d->count("TIMER") == 61);
  }

  TEST_CASE("EMBODIED selections are shown to everyone") {
    Harness h;
    auto [dq, d] = h.player("director", "EMBODIED");
    auto [mq, m] = h.player("matcher", "EMBODIED");
    const auto target = target_of(*d)["country"].get<std::string>();
    const auto wrong = target == "FRA" ? "DEU" : "FRA";
    h.send(*m, "SELECT", {{"country", wrong}});
    REQUIRE(d->last("SELECTION_SHOWN"));
    CHECK((*d->last("SELECTION_SHOWN"))["payload"]["correct"] == false);
    h.send(*m, "SELECT", {{"country", target}});
    CHECK(d->count("SELECTION_SHOWN") == 2);
    CHECK((*d->last("SCORE"))["payload"]["score"] == 1);
    h.send(*d, "REQUEST_NEXT");
    CHECK((*d->last("ERROR"))["payload"]["code"] == "unsupported");
    CHECK(m->count("TARGET") == 0);
    CHECK(h.write_ahead_violations == 0);
  }

  TEST_CASE("sequence gaps are refused, malformed frames close the socket") {
    Harness h;
    auto& q = h.connect(Endpoint::queue);
    h.server.receive(q.id, R"({"seq":2,"kind":"JOIN","payload":{}})", 0);
    REQUIRE(q.last("ERROR"));
    CHECK((*q.last("ERROR"))["payload"]["code"] == "seq");
    CHECK_FALSE(q.closed);
    h.server.receive(q.id, "{{{", 0);
    CHECK((*q.last("ERROR"))["payload"]["code"] == "protocol");
    CHECK(q.closed);
  }

  TEST_CASE("game traffic before JOIN is unauthorized") {
    Harness h;
    auto& p = h.connect(Endpoint::play);
    h.send(p, "SELECT", {{"country", "FRA"}});
    CHECK((*p.last("ERROR"))["payload"]["code"] == "auth");
    h.send(p, "JOIN", {{"token", "bogus"}});
    CHECK((*p.last("ERROR"))["payload"]["code"] == "auth");
  }

  TEST_CASE("double enqueue is refused") {
    Harness h;
    h.server.join("director", Variant::web, std::string("alice"), 0);
    CHECK_THROWS_AS(h.server.join("director", Variant::web, std::string("alice"), 0), QueueError);
    CHECK_THROWS_AS(h.server.join("spectator", Variant::web, std::nullopt, 0), ArgumentError);
  }

  TEST_CASE("queue positions are pushed as the line moves") {
    ServerConfig cfg;
    cfg.autonomous_pool = 1;
    Harness h(cfg);
    auto [aq, a] = h.player("director", "WEB");
    auto& bq = h.connect(Endpoint::queue);
    h.send(bq, "JOIN", {{"role", "director"}, {"variant", "WEB"}});
    auto& cq = h.connect(Endpoint::queue);
    h.send(cq, "JOIN", {{"role", "director"}, {"variant", "WEB"}});
    CHECK((*bq.last("QUEUE_POS"))["payload"]["position"] == 1);
    CHECK((*cq.last("QUEUE_POS"))["payload"]["position"] == 2);
    h.server.disconnect(bq.id, 0);
    CHECK((*cq.last("QUEUE_POS"))["payload"]["position"] == 1);
    h.now = 600'000;
    h.server.advance(h.now);
    CHECK(a->last("END"));
    CHECK(cq.last("PAIRED"));
  }

  TEST_CASE("autonomous pool of two serves the third director when a slot frees") {
    ServerConfig cfg;
    cfg.autonomous_pool = 2;
    Harness h(cfg);
    std::vector<Client*> plays;
    std::vector<JoinResult> joins;
    for (int i = 0; i < 3; ++i) {
      joins.push_back(h.server.join("director", Variant::web, std::nullopt, 0));
      auto& p = h.connect(Endpoint::play);
      h.send(p, "JOIN", {{"token", joins.back().token}});
      plays.push_back(&p);
    }
    CHECK(h.server.sessions().size() == 2);
    CHECK(joins[2].position == 1);
    CHECK(plays[2]->count("START") == 0);
    h.now = 600'000;
    h.server.advance(h.now);
    CHECK(h.server.sessions().size() == 3);
    CHECK(plays[2]->count("START") == 1);
  }

  TEST_CASE("wizard console sees targets and drives the agent") {
    Harness h;
    auto& w = h.connect(Endpoint::wizard);
    h.send(w, "JOIN", {{"role", "wizard"}});
    auto [dq, d] = h.player("director", "EMBODIED");
    REQUIRE(w.last("PAIRED"));
    REQUIRE(w.last("TARGET"));
    CHECK(w.last("KNOWLEDGE"));
    const auto target = target_of(w)["country"].get<std::string>();

    h.send(w, "UTTERANCE", {{"button", "yes_1"}});
    REQUIRE(d->last("UTTERANCE"));
    CHECK((*d->last("UTTERANCE"))["payload"]["button"] == "yes_1");
    h.send(w, "UTTERANCE", {{"button", "nope"}});
    CHECK((*w.last("ERROR"))["payload"]["code"] == "button");
    h.send(w, "ANCHOR", {{"label", "Egypt"}, {"country", "EGY"}});
    CHECK((*w.last("KNOWLEDGE"))["payload"]["anchors"].size() == 1);
    h.send(w, "EMBODIMENT", {{"event", "gaze_user"}});
    CHECK(d->last("EMBODIMENT"));

    h.send(w, "SELECT", {{"country", target}});
    CHECK((*d->last("SCORE"))["payload"]["scored"] == 2);
    CHECK((*d->last("UTTERANCE"))["payload"]["category"] == "reaction_happy");
    h.send(*d, "HOVER", {{"country", "EGY"}});
    CHECK((*w.last("HOVER"))["payload"]["country"] == "EGY");
    CHECK(h.write_ahead_violations == 0);
  }

  TEST_CASE("embodiment is refused in WEB") {
    Harness h;
    auto& w = h.connect(Endpoint::wizard);
    h.send(w, "JOIN", {{"role", "wizard"}});
    h.player("director", "WEB");
    h.send(w, "EMBODIMENT", {{"event", "gaze_user"}});
    CHECK((*w.last("ERROR"))["payload"]["code"] == "unsupported");
  }

  TEST_CASE("autonomous agent answers a name with a selection") {
    ServerConfig cfg;
    cfg.autonomous_pool = 1;
    Harness h(cfg);
    auto [dq, d] = h.player("director", "EMBODIED");
    const auto target = target_of(*d)["country"].get<std::string>();
    h.send(*d, "CHAT", {{"text", "It's " + world().country(target).name}});
    // A known name is selected; an unknown one gets a don't-know, after which
    // a known name is taken as an anchoring point.
    if (seed_countries(Variant::embodied).contains(target)) {
      CHECK(d->last("SELECTION_SHOWN"));
    } else {
      CHECK((*d->last("UTTERANCE"))["payload"]["button"] == "no_2");
      CHECK(d->count("SELECTION_SHOWN") == 0);
      h.send(*d, "CHAT", {{"text", "Do you know Canada?"}});
      CHECK((*d->last("UTTERANCE"))["payload"]["button"] == "backchannel_1");
    }
    CHECK(h.write_ahead_violations == 0);
  }

  TEST_CASE("shared screens receive but cannot send") {
    Harness h;
    auto [dq, d] = h.player("director", "WEB");
    h.player("matcher", "WEB");
    const auto sid = (*d->last("START"))["session"].get<std::string>();
    auto& s = h.connect(Endpoint::play);
    h.send(s, "JOIN", {{"role", "shared_screen"}, {"session", sid}});
    h.send(*d, "CHAT", {{"text", "hello"}});
    CHECK(s.count("CHAT") == 1);
    CHECK(s.count("TARGET") == 0);
    h.send(s, "CHAT", {{"text", "hi"}});
    CHECK((*s.last("ERROR"))["payload"]["code"] == "role");
  }

  TEST_CASE("questionnaires through the token API") {
    ServerConfig cfg;
    cfg.autonomous_pool = 1;
    Harness h(cfg);
    auto j = h.server.join("director", Variant::web, std::nullopt, 0);
    CHECK_THROWS_AS(h.server.submit_questionnaire("bad", {{"x", 1}}), AuthError);
    auto& p = h.connect(Endpoint::play);
    h.send(p, "JOIN", {{"token", j.token}});
    h.server.advance(600'000);
    h.server.submit_questionnaire(j.token, {{"fun", 3}});
    const auto sid = h.server.sessions().front().id;
    CHECK(h.logs.get(questionnaire_name(sid, "director")).has_value());
    CHECK_THROWS_AS(h.server.submit_questionnaire(j.token, {{"fun", 3}}), StateError);
  }
}

TEST_SUITE("logs and replay") {
  std::string finished_log(Harness& h) {
    auto [dq, d] = h.player("director", "WEB");
    auto [mq, m] = h.player("matcher", "WEB");
    for (int i = 0; i < 5; ++i) {
      h.now += 7'000;
      h.send(*m, "SELECT", {{"country", target_of(*d)["country"]}});
      h.send(*d, "REQUEST_NEXT");
    }
    h.now = 600'000;
    h.server.advance(h.now);
    return h.logs.read(h.server.sessions().front().id);
  }

  TEST_CASE("replay recovers the score") {
    Harness h;
    auto text = finished_log(h);
    auto g = replay(SessionLog::parse(text), world());
    CHECK(g.score() == 5);
    CHECK(g.phase() == Phase::finished);
  }

  TEST_CASE("a timestamp going backwards names the event") {
    Harness h;
    auto text = finished_log(h);
    auto log = SessionLog::parse(text);
    // Pull one mid-log event behind its predecessor.
    auto& e = log.events[10];
    e.ts = log.events[9].ts - 1;
    REQUIRE(e.ts >= 0);
    try {
      replay(log, world());
      FAIL("expected ReplayError");
    } catch (const ReplayError& ex) {
      CHECK(std::string(ex.what()).find("event seq " + std::to_string(e.seq)) != std::string::npos);
    }
  }

  TEST_CASE("a different map is refused") {
    Harness h;
    auto log = SessionLog::parse(finished_log(h));
    log.header.map_version = "deadbeef";
    CHECK_THROWS_AS(replay(log, world()), ReplayError);
  }

  TEST_CASE("a tampered score is caught") {
    Harness h;
    auto log = SessionLog::parse(finished_log(h));
    for (auto& e : log.events)
      if (e.kind == MsgKind::SCORE) {
        e.payload["score"] = 99;
        break;
      }
    CHECK_THROWS_AS(replay(log, world()), ReplayError);
  }

  TEST_CASE("garbage logs are refused") {
    CHECK_THROWS_AS(SessionLog::parse(""), ReplayError);
    CHECK_THROWS_AS(SessionLog::parse("not json\n"), ReplayError);
  }

  TEST_CASE("events round-trip through JSON") {
    LogEvent e;
    e.seq = 3;
    e.session = "s1";
    e.ts = 42;
    e.kind = MsgKind::CHAT;
    e.from = "p1";
    e.to = {"director", "matcher"};
    e.payload = {{"text", "hi"}};
    auto back = LogEvent::from_json(e.to_json());
    CHECK(back.to_json() == e.to_json());
  }

  TEST_CASE("directory store") {
    rdg::test::TempDir tmp;
    DirLogStore store(tmp.path);
    store.append("s1", "a");
    store.append("s1", "b");
    store.append("s2", "c");
    CHECK(store.read("s1") == "a\nb\n");
    CHECK(store.sessions() == std::vector<std::string>{"s1", "s2"});
    CHECK(store.put_once("blob.json", "{}"));
    CHECK_FALSE(store.put_once("blob.json", "{1}"));
    CHECK(store.get("blob.json") == "{}");
    CHECK_FALSE(store.get("nope").has_value());
    CHECK_THROWS_AS(store.read("s9"), NotFoundError);
  }

  TEST_CASE("questionnaire validation") {
    validate_questionnaire({{"fun", 1}, {"note", "x"}});
    CHECK_THROWS_AS(validate_questionnaire(json::object()), ValidationError);
    CHECK_THROWS_AS(validate_questionnaire({{"fun", 0}}), ValidationError);
    CHECK_THROWS_AS(validate_questionnaire({{"fun", 2.5}}), ValidationError);
  }
}
