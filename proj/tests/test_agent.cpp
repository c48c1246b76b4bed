#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <map>

#include <nlohmann/json.hpp>

#include "rdg/agent/knowledge.hpp"
#include "rdg/agent/matcher_agent.hpp"
#include "rdg/agent/repertoire.hpp"
#include "rdg/util/errors.hpp"
#include "rdg/util/text.hpp"
#include "support.hpp"

using namespace rdg;
using rdg::test::repertoire;
using rdg::test::world;

namespace {

const DescriptionParser& parser() {
  static const DescriptionParser p(world());
  return p;
}

MatcherAgent agent(Variant v, AgentConfig cfg = {}) {
  return MatcherAgent(world(), parser(), repertoire(), v, AgentKnowledge(seed_countries(v)), cfg);
}

GameState running(Variant v, std::uint64_t seed = 3) {
  auto g = GameState::new_game(v, "dir", "agent", seed, world());
  g.start(0);
  return g;
}

CountryId wrong_for(const GameState& g) {
  for (const auto& id : world().selectable())
    if (id != *g.target()) return id;
  return {};
}

struct BrokenStore final : MemoryStore {
  std::set<CountryId> recall(const ParticipantId&) override { throw StorageError("disk on fire"); }
  void remember(const ParticipantId&, const std::set<CountryId>&) override {}
};

const std::vector<std::string> kDialogue = {
    "The first country is in middle of Africa. It's South Sudan. Do you happen to know where that is?",
    "That's surprising ... Do you know where Egypt is?",
    "Look at the um Africa ... top three biggest countries uh on top of Africa ... You see those?",
    "The one to the furthest right ... is Egypt",
    "Go two down ... that is South Sudan",
    "... Kinda looks like seahorse laying on its back ...",
};

}  // namespace

TEST_SUITE("repertoire") {
  TEST_CASE("shipped grid has 23 WEB buttons and 30 EMBODIED") {
    CHECK(repertoire().available(Variant::web).size() == 23);
    CHECK(repertoire().available(Variant::embodied).size() == 30);
    std::map<std::string, int> cats;
    for (auto* b : repertoire().available(Variant::embodied)) ++cats[b->category];
    CHECK(cats["situation_fix"] == 3);
    CHECK(cats["reaction_happy"] == 2);
    CHECK(cats["reaction_sad"] == 2);
    std::set<std::string> web_cats;
    for (auto* b : repertoire().available(Variant::web)) web_cats.insert(b->category);
    CHECK(web_cats.size() == 8);
  }

  TEST_CASE("a grid with a missing WEB button is rejected") {
    auto j = nlohmann::json::parse(repertoire().source());
    j["buttons"].erase(0);
    CHECK_THROWS_AS(Repertoire::parse(j.dump()), LoadError);
  }

  TEST_CASE("unknown and unavailable buttons raise ButtonError") {
    CHECK_THROWS_AS(repertoire().button("nope", Variant::web), ButtonError);
    CHECK_THROWS_AS(repertoire().button("reaction_happy_1", Variant::web), ButtonError);
    CHECK(repertoire().button("reaction_happy_1", Variant::embodied).category == "reaction_happy");
  }
}

TEST_SUITE("utter") {
  TEST_CASE("yes_1 gives its canonical text") {
    auto a = agent(Variant::web);
    auto u = a.utter("yes_1");
    CHECK(u.text == repertoire().button("yes_1", Variant::web).text);
    CHECK(u.category == "yes");
    CHECK_FALSE(u.expression.has_value());
  }

  TEST_CASE("reactions are EMBODIED only and carry their expression") {
    CHECK_THROWS_AS(agent(Variant::web).utter("reaction_happy_1"), ButtonError);
    auto u = agent(Variant::embodied).utter("reaction_sad_2");
    REQUIRE(u.expression.has_value());
    CHECK(*u.expression == EmbodimentEvent::expressing(Expression::sad));
  }

  TEST_CASE("embodiment events round-trip through JSON") {
    for (const auto& e : {EmbodimentEvent::gaze_screen(), EmbodimentEvent::gaze_user(),
                          EmbodimentEvent::gaze_region("left"), EmbodimentEvent::expressing(Expression::happy),
                          EmbodimentEvent::head_pose(5.0, -10.0)})
      CHECK(EmbodimentEvent::from_json(e.to_json()) == e);
    CHECK_THROWS_AS(EmbodimentEvent::from_json(nlohmann::json{{"event", "dance"}}), ProtocolError);
  }
}

TEST_SUITE("knowledge") {
  TEST_CASE("variant seeds") {
    const auto web = init_knowledge(Variant::web, "new", nullptr).knowledge.known();
    CHECK(web == std::set<CountryId>{"USA", "CAN", "MEX", "BRA", "IND", "CHN", "RUS", "AUS", "ITA"});
    const auto emb = init_knowledge(Variant::embodied, "new", nullptr).knowledge.known();
    CHECK(emb.size() == 11);
    CHECK(emb.contains("SWE"));
    CHECK(emb.contains("FRA"));
  }

  TEST_CASE("returning EMBODIED player brings remembered countries") {
    InMemoryStore store;
    store.remember("p1", {"GHA"});
    auto k = init_knowledge(Variant::embodied, "p1", &store).knowledge.known();
    auto expect = seed_countries(Variant::embodied);
    expect.insert("GHA");
    CHECK(k == expect);
    // WEB ignores memory.
    CHECK(init_knowledge(Variant::web, "p1", &store).knowledge.known() == seed_countries(Variant::web));
  }

  TEST_CASE("unreadable memory degrades to defaults with a warning") {
    BrokenStore store;
    auto init = init_knowledge(Variant::embodied, "p1", &store);
    CHECK(init.knowledge.known() == seed_countries(Variant::embodied));
    REQUIRE(init.warning.has_value());
    CHECK(init.warning->find("disk on fire") != std::string::npos);
  }

  TEST_CASE("learn is idempotent and validates ids") {
    AgentKnowledge k(seed_countries(Variant::web));
    CHECK(k.learn(world(), "GHA"));
    const auto once = k.known();
    CHECK_FALSE(k.learn(world(), "GHA"));
    CHECK(k.known() == once);
    CHECK_FALSE(k.learn(world(), "USA"));
    CHECK(k.learned() == std::set<CountryId>{"GHA"});
    CHECK_THROWS_AS(k.learn(world(), "XYZ"), NotFoundError);
  }

  TEST_CASE("anchors") {
    AgentKnowledge k;
    CHECK(k.add_anchor(world(), "Egypt", "EGY"));
    CHECK_FALSE(k.add_anchor(world(), "Egypt", "EGY"));
    CHECK(k.anchors().size() == 1);
    CHECK_THROWS_AS(k.add_anchor(world(), "", "EGY"), ArgumentError);
    CHECK_THROWS_AS(k.add_anchor(world(), "x", "XYZ"), NotFoundError);

    auto a = agent(Variant::web);
    a.add_anchor("Egypt", "EGY");
    CHECK(a.resolver().context().anchors.back() == "EGY");
  }

  TEST_CASE("file memory store round-trips and unions") {
    rdg::test::TempDir tmp;
    const auto path = tmp.path / "memory.json";
    {
      FileMemoryStore s(path);
      CHECK(s.recall("p").empty());
      s.remember("p", {"GHA"});
      s.remember("p", {"KEN"});
      s.remember("q", {"PER"});
    }
    FileMemoryStore s(path);
    CHECK(s.recall("p") == std::set<CountryId>{"GHA", "KEN"});
    CHECK(s.recall("q") == std::set<CountryId>{"PER"});
    std::ofstream(path) << "{not json";
    CHECK_THROWS_AS(s.recall("p"), StorageError);
  }
}

TEST_SUITE("selection") {
  TEST_CASE("wizard picks the target on guess 1 in EMBODIED") {
    auto g = running(Variant::embodied);
    auto a = agent(Variant::embodied);
    const auto t = *g.target();
    AgentEffects fx;
    auto out = a.wizard_select(g, true, t, 0, std::nullopt, fx);
    CHECK(out.scored == 2);
    REQUIRE(fx.utterances.size() == 1);
    CHECK(fx.utterances[0].category == "reaction_happy");
    CHECK(std::find(fx.embodiment.begin(), fx.embodiment.end(), EmbodimentEvent::expressing(Expression::happy)) !=
          fx.embodiment.end());
    CHECK(a.knowledge().knows(t));
  }

  TEST_CASE("both guesses wrong gives a sad reaction") {
    auto g = running(Variant::embodied);
    auto a = agent(Variant::embodied);
    AgentEffects fx1, fx2;
    a.select(g, wrong_for(g), 0, std::nullopt, fx1);
    CHECK(fx1.utterances.empty());
    a.select(g, wrong_for(g), 0, std::nullopt, fx2);
    REQUIRE(fx2.utterances.size() == 1);
    CHECK(fx2.utterances[0].category == "reaction_sad");
  }

  TEST_CASE("reactions can be switched off") {
    AgentConfig cfg;
    cfg.auto_reactions = false;
    auto g = running(Variant::embodied);
    auto a = agent(Variant::embodied, cfg);
    AgentEffects fx;
    a.select(g, *g.target(), 0, std::nullopt, fx);
    CHECK(fx.utterances.empty());
  }

  TEST_CASE("WEB wrong pick is silent") {
    auto g = running(Variant::web);
    auto a = agent(Variant::web);
    AgentEffects fx;
    auto out = a.wizard_select(g, true, wrong_for(g), 0, std::nullopt, fx);
    CHECK_FALSE(out.reveal);
    CHECK(fx.utterances.empty());
    CHECK(fx.embodiment.empty());
  }

  TEST_CASE("non-wizard callers are refused") {
    auto g = running(Variant::web);
    auto a = agent(Variant::web);
    AgentEffects fx;
    CHECK_THROWS_AS(a.wizard_select(g, false, "FRA", 0, std::nullopt, fx), AuthError);
  }

  TEST_CASE("the reaction expression matches the outcome") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      auto g = running(Variant::embodied, seed);
      auto a = agent(Variant::embodied);
      std::mt19937_64 rng(seed);
      for (int i = 0; i < 30 && g.phase() == Phase::running; ++i) {
        AgentEffects fx;
        const auto pick = rng() % 3 == 0 ? *g.target() : wrong_for(g);
        auto out = a.select(g, pick, 0, std::nullopt, fx);
        for (const auto& e : fx.embodiment) {
          if (e.kind != EmbodimentEvent::Kind::expression) continue;
          CHECK(e.expression == (out.scored > 0 ? Expression::happy : Expression::sad));
          CHECK((out.scored > 0 || out.advanced));
        }
      }
    }
  }

  TEST_CASE("far west and far east countries draw the gaze") {
    auto a = agent(Variant::embodied);
    CHECK(a.gaze_for("BRA") == EmbodimentEvent::gaze_region("left"));
    CHECK(a.gaze_for("CHN") == EmbodimentEvent::gaze_region("right"));
    CHECK_FALSE(a.gaze_for("EGY").has_value());
  }
}

TEST_SUITE("autonomous") {
  TEST_CASE("a known name is selected with a confirmation") {
    auto a = agent(Variant::web);
    auto acts = a.autonomous_step("it's Canada");
    REQUIRE(acts.size() == 2);
    CHECK(acts[0].kind == AgentAction::Kind::select);
    CHECK(acts[0].country == "CAN");
    CHECK(acts[1].button == "confirm_1");
  }

  TEST_CASE("gibberish gets a don't-know and no selection") {
    auto a = agent(Variant::web);
    auto acts = a.autonomous_step("blorp zzz");
    REQUIRE(acts.size() == 1);
    CHECK(acts[0].kind == AgentAction::Kind::utter);
    CHECK(acts[0].button == "no_2");
  }

  TEST_CASE("the sample dialogue ends on South Sudan") {
    auto a = agent(Variant::web);
    std::optional<CountryId> selected;
    std::vector<CountryId> walk;
    for (const auto& line : kDialogue) {
      for (const auto& act : a.autonomous_step(line)) {
        CHECK(!act.rule.empty());
        if (act.kind == AgentAction::Kind::utter) CHECK(repertoire().find(act.button) != nullptr);
        if (act.kind != AgentAction::Kind::select) continue;
        selected = act.country;
        walk = a.resolver().last().result.candidates.front().walk;
      }
    }
    REQUIRE(selected.has_value());
    CHECK(*selected == "SSD");
    CHECK(walk == std::vector<CountryId>{"EGY", "SDN", "SSD"});
  }

  TEST_CASE("same transcript and knowledge, same actions") {
    auto run = [] {
      auto a = agent(Variant::embodied);
      std::vector<AgentAction> acts;
      for (const auto& line : kDialogue)
        for (auto& x : a.autonomous_step(line)) acts.push_back(x);
      a.new_episode();
      for (auto& x : a.autonomous_step("Cnada")) acts.push_back(x);
      return acts;
    };
    CHECK(run() == run());
  }

  TEST_CASE("new episode clears pending clauses but keeps wizard anchors") {
    auto a = agent(Variant::web);
    a.add_anchor("Egypt", "EGY");
    a.autonomous_step("top three biggest countries on top of Africa");
    CHECK_FALSE(a.resolver().pending().empty());
    a.new_episode();
    CHECK(a.resolver().pending().empty());
    CHECK(a.resolver().context().anchors == std::vector<CountryId>{"EGY"});
  }

  TEST_CASE("known set never shrinks over a game") {
    auto g = running(Variant::embodied, 11);
    auto a = agent(Variant::embodied);
    auto before = a.knowledge().known();
    for (int i = 0; i < 20 && g.phase() == Phase::running; ++i) {
      AgentEffects fx;
      a.select(g, i % 2 ? *g.target() : wrong_for(g), 0, std::nullopt, fx);
      const auto& now = a.knowledge().known();
      CHECK(std::includes(now.begin(), now.end(), before.begin(), before.end()));
      before = now;
    }
  }
}
