#include "rdg/sim/run_sim.hpp"

#include <deque>
#include <numeric>
#include <queue>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "rdg/server/session_server.hpp"
#include "rdg/util/errors.hpp"
#include "rdg/util/rng.hpp"

namespace rdg {

using nlohmann::json;

double SimReport::mean_score() const {
  if (games.empty()) return 0.0;
  const double total =
      std::accumulate(games.begin(), games.end(), 0.0, [](double acc, const GameReport& g) { return acc + g.score; });
  return total / static_cast<double>(games.size());
}

json SimReport::to_json(bool include_logs) const {
  json rows = json::array();
  for (const auto& g : games) {
    json r = {{"session", g.session}, {"variant", to_string(g.variant)}, {"seed", g.seed},        {"score", g.score},
              {"served", g.served},   {"resolved", g.resolved},          {"messages", g.messages}};
    if (include_logs) r["log"] = g.log;
    rows.push_back(std::move(r));
  }
  return {{"games", rows}, {"mean_score", mean_score()}};
}

void validate(const SimConfig& c) {
  if (c.games < 0) throw ArgumentError("games must be non-negative");
  for (const auto* p : {&c.director, &c.matcher}) {
    if (p->strategy == Strategy::perfect && p->knowledge_level != 1.0)
      throw ArgumentError("a perfect bot has knowledge level 1");
    if (p->knowledge_level < 0.0 || p->knowledge_level > 1.0) throw ArgumentError("knowledge level must be in [0, 1]");
    if (p->latency_ms < 0) throw ArgumentError("latency must be non-negative");
  }
}

namespace {

enum Actor { kDirector = 0, kMatcher = 1, kScreen = 2 };

struct Pending {
  Millis at;
  std::uint64_t order;
  Actor actor;
  BotSend send;
};

struct Later {
  bool operator()(const Pending& a, const Pending& b) const {
    return a.at != b.at ? a.at > b.at : a.order > b.order;
  }
};

struct Delivery {
  Actor actor;
  int channel;
  std::string text;
};

}  // namespace

GameReport run_game(const WorldMap& map, const DescriptionParser& parser, const Repertoire& repertoire,
                    const SimConfig& config, Variant variant, std::uint64_t seed, int index,
                    std::shared_ptr<const NavigationPlanner> planner) {
  MemoryLogStore logs;
  InMemoryStore memory;
  ServerConfig sc;
  sc.seed = seed;
  sc.session_prefix = fmt::format("g{:04d}-", index);
  sc.autonomous_pool = config.seat == MatcherSeat::autonomous ? 1 : 0;
  SessionServer server(map, repertoire, logs, &memory, sc);

  std::uint64_t bot_seed = seed ^ 0xB07B07B07ULL;
  DirectorBot director(map, repertoire, config.director, variant, splitmix64(bot_seed), std::move(planner));
  std::optional<MatcherBot> matcher;
  if (config.seat != MatcherSeat::autonomous)
    matcher.emplace(map, parser, repertoire, config.matcher, variant, config.seat, splitmix64(bot_seed));

  std::priority_queue<Pending, std::vector<Pending>, Later> queue;
  std::uint64_t order = 0;
  std::deque<Delivery> inbox;
  std::map<std::pair<int, int>, ConnId> conns;
  std::map<ConnId, std::int64_t> out_seq;
  GameReport r;

  auto open = [&](Actor a, int ch, Endpoint e, Millis now) {
    Transport t{[&inbox, a, ch](const std::string& s) { inbox.push_back({a, ch, s}); }, [] {}};
    conns[{a, ch}] = server.connect(e, std::move(t), now);
  };
  auto schedule = [&](Actor a, std::vector<BotSend> sends) {
    for (auto& s : sends) queue.push({s.at, order++, a, std::move(s)});
  };
  auto drain = [&](Millis now) {
    while (!inbox.empty()) {
      auto d = std::move(inbox.front());
      inbox.pop_front();
      auto m = WireMessage::parse(d.text);
      if (m.kind == MsgKind::ERROR)
        throw ProtocolError(fmt::format("game {}: server rejected a {} frame at {} ms: {}", index,
                                        d.actor == kDirector ? "director" : "matcher", now, m.payload.dump()));
      const std::string kind(to_string(m.kind));
      if (d.actor == kScreen) {
        ++r.screen_received[kind];
        continue;
      }
      if (d.actor == kDirector) {
        ++r.director_received[kind];
        if (config.shared_screen && m.kind == MsgKind::PAIRED && !conns.contains({kScreen, 0})) {
          open(kScreen, 0, Endpoint::play, now);
          const ConnId sc = conns[{kScreen, 0}];
          json frame = {{"seq", ++out_seq[sc]},
                        {"kind", "JOIN"},
                        {"payload", {{"role", "shared_screen"}, {"session", m.payload.at("session")}}}};
          server.receive(sc, frame.dump(), now);
        }
        schedule(kDirector, director.on_message(d.channel, m, now));
      } else if (matcher) {
        ++r.matcher_received[kind];
        schedule(kMatcher, matcher->on_message(d.channel, m, now));
      }
    }
  };

  const std::string who = fmt::format("g{:04d}", index);
  if (matcher) {
    open(kMatcher, 0, config.seat == MatcherSeat::wizard ? Endpoint::wizard : Endpoint::queue, 0);
    schedule(kMatcher, matcher->start(0, "matcher-" + who));
  }
  open(kDirector, 0, Endpoint::queue, 0);
  schedule(kDirector, director.start(0, "director-" + who));
  drain(0);

  // Bot frames win ties against server timers.
  const Millis horizon = 4 * kGameDurationMs;
  while (!director.ended()) {
    const auto timer = server.next_timer();
    if (!queue.empty() && (!timer || queue.top().at <= *timer)) {
      auto p = queue.top();
      queue.pop();
      if (p.at > horizon) break;
      if (p.actor == kDirector && !director.still_valid(p.send)) continue;
      if (p.send.connect_play) open(p.actor, p.send.channel, Endpoint::play, p.at);
      auto it = conns.find({p.actor, p.send.channel});
      if (it == conns.end()) throw StateError("bot sent on an unopened channel");
      json frame = {{"seq", ++out_seq[it->second]}, {"kind", to_string(p.send.kind)}, {"payload", p.send.payload}};
      server.receive(it->second, frame.dump(), p.at);
      drain(p.at);
    } else if (timer) {
      if (*timer > horizon) break;
      server.advance(*timer);
      drain(*timer);
    } else {
      break;
    }
  }

  r.variant = variant;
  r.seed = seed;
  auto all = server.sessions();
  if (all.empty()) throw StateError("simulated game never paired");
  const auto& s = all.front();
  if (!s.ended) spdlog::warn("game {} stalled before the end", s.id);
  r.session = s.id;
  r.score = s.score;
  r.served = s.served;
  r.resolved = s.resolved;
  r.log = logs.read(s.id);
  r.messages = static_cast<int>(std::count(r.log.begin(), r.log.end(), '\n')) - 1;
  return r;
}

SimReport run_sim(const WorldMap& map, const Repertoire& repertoire, const SimConfig& config,
                  const std::function<void(const GameReport&)>& on_game) {
  validate(config);
  DescriptionParser parser(map);
  const auto planner = std::make_shared<const NavigationPlanner>(map);
  SimReport report;
  std::uint64_t state = config.seed;
  for (int i = 0; i < config.games; ++i) {
    const Variant v = config.alternate_variants ? (i % 2 == 0 ? Variant::web : Variant::embodied) : config.variant;
    auto g = run_game(map, parser, repertoire, config, v, splitmix64(state), i, planner);
    if (on_game) on_game(g);
    report.games.push_back(std::move(g));
  }
  return report;
}

}  // namespace rdg
