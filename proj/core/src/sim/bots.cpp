#include "rdg/sim/bots.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <tuple>

#include <fmt/format.h>

#include "rdg/util/errors.hpp"
#include "rdg/util/rng.hpp"

namespace rdg {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::perfect: return "perfect";
    case Strategy::anchor_navigator: return "anchor_navigator";
    case Strategy::random: return "random";
  }
  return "?";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "perfect") return Strategy::perfect;
  if (s == "anchor_navigator" || s == "anchor") return Strategy::anchor_navigator;
  if (s == "random") return Strategy::random;
  throw ArgumentError("unknown strategy '" + std::string(s) + "'");
}

std::string_view to_string(MatcherSeat s) {
  switch (s) {
    case MatcherSeat::human: return "human";
    case MatcherSeat::wizard: return "wizard";
    case MatcherSeat::autonomous: return "autonomous";
  }
  return "?";
}

MatcherSeat seat_from_string(std::string_view s) {
  if (s == "human") return MatcherSeat::human;
  if (s == "wizard") return MatcherSeat::wizard;
  if (s == "autonomous") return MatcherSeat::autonomous;
  throw ArgumentError("unknown matcher seat '" + std::string(s) + "'");
}

namespace {

constexpr Direction kDirs[] = {Direction::north, Direction::south, Direction::east, Direction::west};

std::string_view spoken(Direction d) {
  switch (d) {
    case Direction::north: return "up";
    case Direction::south: return "down";
    case Direction::east: return "right";
    case Direction::west: return "left";
  }
  return "?";
}

std::string count_word(int n) {
  static const char* kWords[] = {"zero", "one", "two", "three", "four", "five",
                                 "six",  "seven", "eight", "nine", "ten"};
  return n >= 0 && n <= 10 ? kWords[n] : std::to_string(n);
}

// Shortest step walk from `from` to `to`, at most `limit` steps; ties go to
// the first direction in north, south, east, west order.
template <class Graph>
std::optional<std::vector<Direction>> walk(const Graph& g, const CountryId& from, const CountryId& to,
                                           std::size_t limit) {
  std::map<CountryId, std::vector<Direction>> seen{{from, {}}};
  std::deque<CountryId> q{from};
  while (!q.empty()) {
    auto cur = q.front();
    q.pop_front();
    if (cur == to) return seen.at(cur);
    if (seen.at(cur).size() >= limit) continue;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& next = g.at(cur)[k];
      if (!next || seen.contains(*next)) continue;
      auto path = seen.at(cur);
      path.push_back(kDirs[k]);
      seen.emplace(*next, std::move(path));
      q.push_back(*next);
    }
  }
  return std::nullopt;
}

}  // namespace

NavigationPlanner::NavigationPlanner(const WorldMap& map) : map_(&map) {
  for (const auto& [id, c] : map.countries()) {
    for (std::size_t k = 0; k < 4; ++k) {
      steps_[id][k] = map.step_in_direction(id, kDirs[k]);
      if (steps_[id][k]) preds_[*steps_[id][k]].push_back(id);
    }
  }
  // Regions whose spoken tag would parse as a country name are unusable.
  for (const auto& tag : map.region_tags()) {
    if (map.lookup_name(tag)) continue;
    const auto size = static_cast<int>(map.region_members(tag).size());
    for (int n = 1; n <= std::min(10, size); ++n) {
      auto top = map.largest_in_region(tag, n);
      if (n == 1) {
        options_.push_back({tag, 1, Side::east, top[0]});
        continue;
      }
      for (auto side : {Side::east, Side::west})
        options_.push_back({tag, n, side, map.extremal_by_longitude(top, side)});
    }
  }
}

std::vector<std::string> navigation_plan(const WorldMap& map, const CountryId& target) {
  return NavigationPlanner(map).plan(target);
}

std::vector<std::string> NavigationPlanner::plan(const CountryId& target) const {
  const auto& map = *map_;
  const std::string name = map.country(target).name;
  std::vector<std::string> plan{fmt::format("The next country is {}.", name)};

  // Steps needed to reach the target from each country, up to four.
  constexpr std::size_t kLimit = 4;
  std::map<CountryId, std::size_t> dist{{target, 0}};
  std::deque<CountryId> q{target};
  while (!q.empty()) {
    auto cur = q.front();
    q.pop_front();
    auto it = preds_.find(cur);
    if (dist.at(cur) >= kLimit || it == preds_.end()) continue;
    for (const auto& p : it->second) {
      if (dist.contains(p)) continue;
      dist.emplace(p, dist.at(cur) + 1);
      q.push_back(p);
    }
  }

  std::optional<std::tuple<std::size_t, int, std::string, int>> best_key;
  const Option* best = nullptr;
  for (const auto& o : options_) {
    auto it = dist.find(o.anchor);
    if (it == dist.end()) continue;
    auto key = std::make_tuple(it->second, o.n, o.region, static_cast<int>(o.side));
    if (!best_key || key < *best_key) {
      best_key = key;
      best = &o;
    }
  }
  if (!best) {
    plan.push_back(fmt::format("It's {}.", name));
    return plan;
  }
  const auto best_walk = *walk(steps_, best->anchor, target, kLimit);

  const std::string anchor_name = map.country(best->anchor).name;
  if (best->n == 1) {
    plan.push_back(fmt::format("Look at {} ... the biggest country there.", best->region));
    plan.push_back(fmt::format("That one is {}.", anchor_name));
  } else {
    plan.push_back(fmt::format("Look at {} ... the top {} biggest countries there.", best->region, count_word(best->n)));
    plan.push_back(fmt::format("The one furthest {} ... is {}.", best->side == Side::east ? "right" : "left",
                               anchor_name));
  }
  for (std::size_t i = 0; i < best_walk.size();) {
    std::size_t j = i;
    while (j < best_walk.size() && best_walk[j] == best_walk[i]) ++j;
    std::string line = fmt::format("Go {} {}", count_word(static_cast<int>(j - i)), spoken(best_walk[i]));
    line += j == best_walk.size() ? fmt::format(" ... that is {}.", name) : " ...";
    plan.push_back(std::move(line));
    i = j;
  }
  return plan;
}

// ---- Director ---------------------------------------------------------------

DirectorBot::DirectorBot(const WorldMap& map, const Repertoire& repertoire, BotPolicy policy, Variant variant,
                         std::uint64_t seed, std::shared_ptr<const NavigationPlanner> planner)
    : map_(&map), repertoire_(&repertoire), policy_(policy), variant_(variant), rng_(seed), planner_(std::move(planner)) {
  if (!planner_ && policy_.strategy == Strategy::anchor_navigator)
    planner_ = std::make_shared<NavigationPlanner>(map);
}

std::vector<BotSend> DirectorBot::start(Millis now, const std::string& participant) const {
  BotSend s{now, 0, MsgKind::JOIN, {{"role", "director"}, {"variant", to_string(variant_)}}};
  if (!participant.empty()) s.payload["participant"] = participant;
  return {s};
}

BotSend DirectorBot::chat(Millis at, std::string text) const {
  BotSend s{at, 1, MsgKind::CHAT, {{"text", std::move(text)}}};
  s.epoch = epoch_;
  return s;
}

std::string DirectorBot::category_of(const WireMessage& m) const {
  if (m.kind == MsgKind::UTTERANCE) return m.payload.value("category", "");
  const auto text = m.payload.value("text", "");
  for (const auto* b : repertoire_->available(variant_))
    if (b->text == text) return b->category;
  return "other";
}

std::vector<BotSend> DirectorBot::proceed(Millis now) {
  const Millis at = now + policy_.latency_ms;
  if (policy_.strategy == Strategy::perfect) {
    // The name is all a perfect director offers; give up after one repeat.
    if (plan_pos_ == 0) {
      plan_pos_ = 1;
      return {chat(at, fmt::format("It's {}.", map_->country(*target_).name))};
    }
  } else if (plan_pos_ + 1 < plan_.size()) {
    return {chat(at, plan_[++plan_pos_])};
  }
  if (variant_ == Variant::web) {
    BotSend s{at, 1, MsgKind::REQUEST_NEXT};
    s.epoch = epoch_;
    return {s};
  }
  return {chat(at, fmt::format("It's {}.", map_->country(*target_).name))};
}

std::vector<BotSend> DirectorBot::on_message(int channel, const WireMessage& m, Millis now) {
  if (ended_) return {};
  switch (m.kind) {
    case MsgKind::JOIN:
      if (channel == 0 && m.payload.contains("token")) token_ = m.payload["token"].get<std::string>();
      return {};
    case MsgKind::PAIRED: {
      BotSend s{now, 1, MsgKind::JOIN, {{"token", token_}}};
      s.connect_play = true;
      return {s};
    }
    case MsgKind::TARGET: {
      target_ = m.payload.at("country").get<std::string>();
      ++epoch_;
      plan_pos_ = 0;
      if (policy_.strategy == Strategy::perfect) {
        plan_ = {fmt::format("The next country is {}.", map_->country(*target_).name)};
      } else {
        plan_ = planner_->plan(*target_);
      }
      return {chat(now + policy_.latency_ms, plan_[0])};
    }
    case MsgKind::CHAT:
      if (m.payload.value("role", "") == "director") return {};
      [[fallthrough]];
    case MsgKind::UTTERANCE: {
      if (!target_) return {};
      const auto cat = category_of(m);
      if (cat == "confirmation") {
        if (variant_ != Variant::web) return {};
        BotSend s{now, 1, MsgKind::REQUEST_NEXT};
        s.epoch = epoch_;
        return {s};
      }
      if (cat == "opening" || cat == "closing" || cat.starts_with("reaction")) return {};
      return proceed(now);
    }
    case MsgKind::SELECTION_SHOWN:
      if (!m.payload.value("correct", false) && m.payload.value("guess", 0) == 1) return proceed(now);
      return {};
    case MsgKind::END:
      ended_ = true;
      end_ = m.payload;
      return {};
    default: return {};
  }
}

// ---- Matcher ----------------------------------------------------------------

namespace {

AgentKnowledge bot_knowledge(const WorldMap& map, const BotPolicy& policy, Variant variant, std::mt19937_64& rng) {
  if (policy.strategy == Strategy::perfect || policy.knowledge_level >= 1.0) {
    std::set<CountryId> all;
    for (const auto& [id, c] : map.countries()) all.insert(id);
    return AgentKnowledge(std::move(all));
  }
  auto known = seed_countries(variant);
  const auto bound = static_cast<std::uint64_t>(policy.knowledge_level * 1'000'000.0);
  for (const auto& [id, c] : map.countries())
    if (uniform_below(rng, 1'000'000) < bound) known.insert(id);
  return AgentKnowledge(std::move(known));
}

}  // namespace

MatcherBot::MatcherBot(const WorldMap& map, const DescriptionParser& parser, const Repertoire& repertoire,
                       BotPolicy policy, Variant variant, MatcherSeat seat, std::uint64_t seed)
    : map_(&map), repertoire_(&repertoire), policy_(policy), variant_(variant), seat_(seat), rng_(seed) {
  if (seat == MatcherSeat::autonomous) throw ArgumentError("the autonomous seat is played by the server");
  AgentConfig cfg;
  cfg.auto_reactions = false;
  agent_ = std::make_unique<MatcherAgent>(map, parser, repertoire, variant, bot_knowledge(map, policy, variant, rng_),
                                          cfg);
}

std::vector<BotSend> MatcherBot::start(Millis now, const std::string& participant) const {
  if (seat_ == MatcherSeat::wizard) return {BotSend{now, 0, MsgKind::JOIN, {{"role", "wizard"}}}};
  BotSend s{now, 0, MsgKind::JOIN, {{"role", "matcher"}, {"variant", to_string(variant_)}}};
  if (!participant.empty()) s.payload["participant"] = participant;
  return {s};
}

BotSend MatcherBot::say(Millis at, std::string_view button) const {
  const int ch = seat_ == MatcherSeat::wizard ? 0 : 1;
  if (seat_ == MatcherSeat::wizard) return {at, ch, MsgKind::UTTERANCE, {{"button", button}}};
  return {at, ch, MsgKind::CHAT, {{"text", repertoire_->button(button, variant_).text}}};
}

std::vector<BotSend> MatcherBot::respond(const std::string& text, Millis at) {
  const int ch = seat_ == MatcherSeat::wizard ? 0 : 1;
  std::vector<BotSend> out;
  if (policy_.strategy == Strategy::random) {
    const auto& pool = map_->selectable();
    last_selected_ = pool[uniform_below(rng_, pool.size())];
    out.push_back({at, ch, MsgKind::SELECT, {{"country", *last_selected_}, {"episode", episode_}}});
    out.push_back(say(at, policy_buttons::confirm));
    return out;
  }
  for (const auto& a : agent_->autonomous_step(text)) {
    if (a.kind == AgentAction::Kind::select) {
      agent_->note_selected(a.country);
      last_selected_ = a.country;
      out.push_back({at, ch, MsgKind::SELECT, {{"country", a.country}, {"episode", episode_}}});
    } else if (a.kind == AgentAction::Kind::utter) {
      out.push_back(say(at, a.button));
    }
  }
  return out;
}

std::vector<BotSend> MatcherBot::on_message(int channel, const WireMessage& m, Millis now) {
  switch (m.kind) {
    case MsgKind::JOIN:
      if (channel == 0 && m.payload.contains("token")) token_ = m.payload["token"].get<std::string>();
      return {};
    case MsgKind::PAIRED: {
      if (seat_ == MatcherSeat::wizard) return {};
      BotSend s{now, 1, MsgKind::JOIN, {{"token", token_}}};
      s.connect_play = true;
      return {s};
    }
    case MsgKind::TARGET:
      episode_ = m.payload.value("episode", episode_);
      return {};
    case MsgKind::CHAT:
      if (m.payload.value("role", "") != "director") return {};
      return respond(m.payload.at("text").get<std::string>(), now + policy_.latency_ms);
    case MsgKind::SCORE:
      if (m.payload.value("correct", false) && last_selected_) agent_->learn(*last_selected_);
      agent_->new_episode();
      episode_ = m.payload.value("episode", episode_) + 1;
      last_selected_.reset();
      return {};
    default: return {};
  }
}

}  // namespace rdg
