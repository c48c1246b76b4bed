#include <doctest.h>

#include <cmath>
#include <fstream>

#include "rdg/resolver/parser.hpp"
#include "rdg/server/replay.hpp"
#include "rdg/sim/bots.hpp"
#include "rdg/sim/corpus_stats.hpp"
#include "rdg/sim/run_sim.hpp"
#include "rdg/util/errors.hpp"
#include "support.hpp"

using namespace rdg;
using rdg::test::repertoire;
using rdg::test::world;

namespace {

SimConfig config(Variant v, Strategy director, Strategy matcher, int games, std::uint64_t seed = 1) {
  SimConfig c;
  c.variant = v;
  c.director.strategy = director;
  c.matcher.strategy = matcher;
  c.director.latency_ms = 3'000;
  c.games = games;
  c.seed = seed;
  return c;
}

int count_kind(const SessionLog& log, MsgKind k) {
  int n = 0;
  for (const auto& e : log.events) n += e.kind == k;
  return n;
}

}  // namespace

TEST_SUITE("simulation") {
  TEST_CASE("perfect bots in WEB score one point per resolved target") {
    auto rep = run_sim(world(), repertoire(), config(Variant::web, Strategy::perfect, Strategy::perfect, 2));
    for (const auto& g : rep.games) {
      CHECK(g.score == g.resolved);
      CHECK(g.score == 120);
      CHECK(g.matcher_received.count("TARGET") == 0);
    }
  }

  TEST_CASE("perfect bots in EMBODIED score two points per target") {
    auto rep = run_sim(world(), repertoire(), config(Variant::embodied, Strategy::perfect, Strategy::perfect, 2));
    for (const auto& g : rep.games) {
      CHECK(g.score == 2 * g.resolved);
      CHECK(g.score > 0);
    }
  }

  TEST_CASE("shared screen sees every EMBODIED selection and no target") {
    auto c = config(Variant::embodied, Strategy::anchor_navigator, Strategy::anchor_navigator, 3);
    c.shared_screen = true;
    auto rep = run_sim(world(), repertoire(), c);
    for (const auto& g : rep.games) {
      const auto log = SessionLog::parse(g.log);
      const int selects = count_kind(log, MsgKind::SELECT);
      CHECK(selects > 0);
      CHECK(g.screen_received.at("SELECTION_SHOWN") == selects);
      CHECK(g.screen_received.count("TARGET") == 0);
    }
  }

  TEST_CASE("random matcher stays within three sigma of resolved/N") {
    auto rep = run_sim(world(), repertoire(), config(Variant::web, Strategy::perfect, Strategy::random, 150, 77));
    const double p = 1.0 / static_cast<double>(world().selectable().size());
    double expect = 0, var = 0, got = 0;
    for (const auto& g : rep.games) {
      expect += g.resolved * p;
      var += g.resolved * p * (1 - p);
      got += g.score;
    }
    MESSAGE("score " << got << " expected " << expect << " sigma " << std::sqrt(var));
    CHECK(std::abs(got - expect) <= 3 * std::sqrt(var));
  }

  TEST_CASE("every seat, variant and strategy runs clean") {
    for (auto seat : {MatcherSeat::human, MatcherSeat::wizard}) {
      for (auto s : {Strategy::perfect, Strategy::anchor_navigator, Strategy::random}) {
        auto c = config(Variant::web, Strategy::anchor_navigator, s, 2, 3);
        c.alternate_variants = true;
        c.seat = seat;
        CHECK_NOTHROW(run_sim(world(), repertoire(), c));
      }
    }
    auto c = config(Variant::web, Strategy::anchor_navigator, Strategy::perfect, 2, 3);
    c.alternate_variants = true;
    c.seat = MatcherSeat::autonomous;
    auto rep = run_sim(world(), repertoire(), c);
    for (const auto& g : rep.games) CHECK(g.score > 0);
  }

  TEST_CASE("re-runs are byte-identical and replay to the reported score") {
    auto c = config(Variant::web, Strategy::anchor_navigator, Strategy::anchor_navigator, 6, 99);
    c.alternate_variants = true;
    auto a = run_sim(world(), repertoire(), c);
    auto b = run_sim(world(), repertoire(), c);
    REQUIRE(a.games.size() == b.games.size());
    for (std::size_t i = 0; i < a.games.size(); ++i) {
      CHECK(a.games[i].log == b.games[i].log);
      auto g = replay(SessionLog::parse(a.games[i].log), world());
      CHECK(g.score() == a.games[i].score);
      CHECK(g.phase() == Phase::finished);
    }
    CHECK(a.games[0].variant == Variant::web);
    CHECK(a.games[1].variant == Variant::embodied);
  }

  TEST_CASE("invalid policies are refused") {
    auto c = config(Variant::web, Strategy::perfect, Strategy::perfect, 1);
    c.director.knowledge_level = 0.5;
    CHECK_THROWS_AS(validate(c), ArgumentError);
    c = config(Variant::web, Strategy::random, Strategy::random, 1);
    c.matcher.knowledge_level = 1.5;
    CHECK_THROWS_AS(validate(c), ArgumentError);
    c.matcher.knowledge_level = 1.0;
    c.games = -1;
    CHECK_THROWS_AS(validate(c), ArgumentError);
    CHECK_THROWS_AS(strategy_from_string("clever"), ArgumentError);
  }
}

TEST_SUITE("navigation plans") {
  TEST_CASE("plans are resolved by the agent to their target") {
    const DescriptionParser parser(world());
    int checked = 0;
    for (const auto& target : world().selectable()) {
      auto plan = navigation_plan(world(), target);
      REQUIRE_FALSE(plan.empty());
      if (plan.size() < 3) continue;  // no anchor walk exists
      ++checked;
      MatcherAgent agent(world(), parser, repertoire(), Variant::web, AgentKnowledge(seed_countries(Variant::web)));
      std::optional<CountryId> picked;
      for (std::size_t i = 0; i < plan.size(); ++i)
        for (const auto& a : agent.autonomous_step(plan[i]))
          if (a.kind == AgentAction::Kind::select) picked = a.country;
      CHECK_MESSAGE(picked == target, target << ": " << plan.back());
    }
    CHECK(checked >= 150);
  }
}

TEST_SUITE("corpus stats") {
  TEST_CASE("a corrupt log is skipped, the rest are counted") {
    rdg::test::TempDir tmp;
    DirLogStore store(tmp.path);
    auto c = config(Variant::embodied, Strategy::anchor_navigator, Strategy::anchor_navigator, 10, 5);
    auto rep = run_sim(world(), repertoire(), c);
    for (const auto& g : rep.games) {
      std::size_t start = 0;
      while (start < g.log.size()) {
        auto end = g.log.find('\n', start);
        store.append(g.session, g.log.substr(start, end - start));
        start = end + 1;
      }
    }
    // Truncate one log mid-line.
    const auto victim = tmp.path / (rep.games[4].session + ".jsonl");
    const auto text = store.read(rep.games[4].session);
    std::ofstream(victim, std::ios::trunc) << text.substr(0, text.size() / 2);

    auto stats = corpus_stats(store, world());
    CHECK(stats.sessions.size() == 9);
    REQUIRE(stats.skipped.size() == 1);
    CHECK(stats.skipped[0].rfind(rep.games[4].session, 0) == 0);
    for (const auto& s : stats.sessions) {
      CHECK(s.selections >= s.correct_selections);
      if (s.selections) CHECK(s.guess_accuracy == doctest::Approx(double(s.correct_selections) / s.selections));
    }
    CHECK(stats.to_json()["sessions"].size() == 9);
    CHECK(stats.to_table().find("skipped") != std::string::npos);
  }

  TEST_CASE("an empty store gives an empty report") {
    rdg::test::TempDir tmp;
    DirLogStore store(tmp.path);
    auto stats = corpus_stats(store, world());
    CHECK(stats.sessions.empty());
    CHECK(stats.skipped.empty());
  }

  TEST_CASE("perfect EMBODIED stats") {
    auto rep = run_sim(world(), repertoire(), config(Variant::embodied, Strategy::perfect, Strategy::perfect, 1));
    auto s = session_stats(SessionLog::parse(rep.games[0].log), world());
    CHECK(s.score == rep.games[0].score);
    CHECK(s.guess_accuracy == 1.0);
    CHECK(s.selections == s.resolved);
  }
}
