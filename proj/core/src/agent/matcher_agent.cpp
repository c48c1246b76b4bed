#include "rdg/agent/matcher_agent.hpp"

#include <nlohmann/json.hpp>

#include "rdg/util/errors.hpp"

namespace rdg {
namespace {

const char* kind_name(EmbodimentEvent::Kind k) {
  switch (k) {
    case EmbodimentEvent::Kind::gaze_screen: return "gaze_screen";
    case EmbodimentEvent::Kind::gaze_user: return "gaze_user";
    case EmbodimentEvent::Kind::gaze_region: return "gaze_region";
    case EmbodimentEvent::Kind::expression: return "expression";
    case EmbodimentEvent::Kind::head_pose: return "head_pose";
  }
  return "?";
}

}  // namespace

nlohmann::json EmbodimentEvent::to_json() const {
  nlohmann::json j = {{"event", kind_name(kind)}};
  switch (kind) {
    case Kind::gaze_region: j["side"] = side; break;
    case Kind::expression: j["expression"] = expression == Expression::happy ? "happy" : "sad"; break;
    case Kind::head_pose:
      j["tilt"] = tilt;
      j["pan"] = pan;
      break;
    default: break;
  }
  return j;
}

EmbodimentEvent EmbodimentEvent::from_json(const nlohmann::json& j) {
  try {
    const auto name = j.at("event").get<std::string>();
    if (name == "gaze_screen") return gaze_screen();
    if (name == "gaze_user") return gaze_user();
    if (name == "gaze_region") {
      auto side = j.at("side").get<std::string>();
      if (side != "left" && side != "right") throw ProtocolError("gaze_region side must be left or right");
      return gaze_region(side);
    }
    if (name == "expression") {
      const auto e = j.at("expression").get<std::string>();
      if (e == "happy") return expressing(Expression::happy);
      if (e == "sad") return expressing(Expression::sad);
      throw ProtocolError("unknown expression '" + e + "'");
    }
    if (name == "head_pose") return head_pose(j.at("tilt").get<double>(), j.at("pan").get<double>());
    throw ProtocolError("unknown embodiment event '" + name + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed embodiment event: ") + e.what());
  }
}

nlohmann::json AgentUtterance::to_json() const {
  nlohmann::json j = {{"button", button}, {"category", category}, {"text", text}};
  if (!rule.empty()) j["rule"] = rule;
  return j;
}

MatcherAgent::MatcherAgent(const WorldMap& map, const DescriptionParser& parser, const Repertoire& repertoire,
                           Variant variant, AgentKnowledge knowledge, AgentConfig config)
    : map_(&map),
      repertoire_(&repertoire),
      variant_(variant),
      knowledge_(std::move(knowledge)),
      config_(config),
      resolver_(parser, ResolutionContext{&map, {}, knowledge_.known()}, config.scores) {}

AgentUtterance MatcherAgent::utter(std::string_view button, std::string rule) const {
  const auto& b = repertoire_->button(button, variant_);
  AgentUtterance u{b.id, b.category, b.text, std::move(rule), std::nullopt};
  if (variant_ == Variant::embodied) {
    if (b.category == "reaction_happy") u.expression = EmbodimentEvent::expressing(Expression::happy);
    if (b.category == "reaction_sad") u.expression = EmbodimentEvent::expressing(Expression::sad);
  }
  return u;
}

SelectionOutcome MatcherAgent::wizard_select(GameState& game, bool caller_is_wizard, std::string_view country,
                                             Millis now, std::optional<int> episode, AgentEffects& effects) {
  if (!caller_is_wizard) throw AuthError("only the session's wizard may select for the agent");
  return select(game, country, now, episode, effects);
}

SelectionOutcome MatcherAgent::select(GameState& game, std::string_view country, Millis now,
                                      std::optional<int> episode, AgentEffects& effects) {
  auto outcome = game.select_at(now, game.matcher(), country, episode);
  tried_.insert(CountryId(country));
  if (variant_ == Variant::embodied) {
    if (auto g = gaze_for(CountryId(country))) effects.embodiment.push_back(*g);
  }
  auto more = on_outcome(outcome);
  effects.utterances.insert(effects.utterances.end(), more.utterances.begin(), more.utterances.end());
  effects.embodiment.insert(effects.embodiment.end(), more.embodiment.begin(), more.embodiment.end());
  effects.learned.insert(effects.learned.end(), more.learned.begin(), more.learned.end());
  return outcome;
}

AgentEffects MatcherAgent::on_outcome(const SelectionOutcome& outcome) {
  AgentEffects fx;
  if (outcome.scored > 0 && outcome.resolved && learn(*outcome.resolved)) fx.learned.push_back(*outcome.resolved);
  if (variant_ == Variant::embodied && config_.auto_reactions && outcome.reveal) {
    std::optional<AgentUtterance> r;
    if (outcome.scored > 0) {
      r = utter("reaction_happy_" + std::to_string(1 + happy_count_++ % 2), "auto_reaction");
    } else if (outcome.advanced) {
      r = utter("reaction_sad_" + std::to_string(1 + sad_count_++ % 2), "auto_reaction");
    }
    if (r) {
      if (r->expression) fx.embodiment.push_back(*r->expression);
      fx.utterances.push_back(std::move(*r));
    }
  }
  if (outcome.advanced) new_episode();
  return fx;
}

std::vector<AgentAction> MatcherAgent::autonomous_step(std::string_view director_text) {
  const auto& step = resolver_.feed(director_text);
  const auto& res = step.result;
  if (!target_hint_ && !res.unknown_names.empty()) target_hint_ = res.unknown_names.front();

  auto say = [](std::string_view button, std::string rule) {
    return AgentAction{AgentAction::Kind::utter, {}, std::string(button), std::move(rule)};
  };

  if (step.promoted) {
    const auto& top = *step.promoted;
    // A confidently located country other than the one named as the target
    // is an anchoring point, not the answer.
    if (target_hint_ && top != *target_hint_) return {say(policy_buttons::acknowledge, "anchor_ack")};
    if (variant_ == Variant::embodied && tried_.contains(top)) return {say(policy_buttons::clarify, "already_tried")};
    return {AgentAction{AgentAction::Kind::select, top, {}, "select_confident"},
            say(policy_buttons::confirm, "select_confident")};
  }
  if (!res.unknown_names.empty()) return {say(policy_buttons::dont_know, "unknown_name")};
  if (!res.candidates.empty()) return {say(policy_buttons::clarify, "ambiguous")};
  if (step.clauses.empty()) return {say(policy_buttons::dont_know, "no_parse")};
  return {say(policy_buttons::need_anchor, "no_candidate")};
}

bool MatcherAgent::add_anchor(std::string label, const CountryId& id) {
  if (!knowledge_.add_anchor(*map_, std::move(label), id)) return false;
  resolver_.add_anchor(id);
  return true;
}

bool MatcherAgent::learn(const CountryId& id) {
  if (!knowledge_.learn(*map_, id)) return false;
  resolver_.add_known(id);
  return true;
}

std::vector<CountryId> MatcherAgent::standing_anchors() const {
  std::vector<CountryId> out;
  for (const auto& a : knowledge_.anchors()) out.push_back(a.id);
  return out;
}

void MatcherAgent::new_episode() {
  resolver_.reset(standing_anchors());
  target_hint_.reset();
  tried_.clear();
}

std::optional<EmbodimentEvent> MatcherAgent::gaze_for(const CountryId& id) const {
  const auto* c = map_->find(id);
  if (!c) return std::nullopt;
  if (c->centroid.lon < config_.gaze_left_lon) return EmbodimentEvent::gaze_region("left");
  if (c->centroid.lon > config_.gaze_right_lon) return EmbodimentEvent::gaze_region("right");
  return std::nullopt;
}

}  // namespace rdg
