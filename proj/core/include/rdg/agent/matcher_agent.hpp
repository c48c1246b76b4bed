#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rdg/agent/knowledge.hpp"
#include "rdg/agent/repertoire.hpp"
#include "rdg/game/game_state.hpp"
#include "rdg/resolver/resolver.hpp"

namespace rdg {

enum class Expression { happy, sad };

struct EmbodimentEvent {
  enum class Kind { gaze_screen, gaze_user, gaze_region, expression, head_pose };
  Kind kind = Kind::gaze_screen;
  std::string side;  // gaze_region: "left" or "right"
  Expression expression = Expression::happy;
  double tilt = 0.0;  // head_pose, degrees
  double pan = 0.0;

  static EmbodimentEvent gaze_screen() { return {}; }
  static EmbodimentEvent gaze_user() { return {Kind::gaze_user, {}}; }
  static EmbodimentEvent gaze_region(std::string side) { return {Kind::gaze_region, std::move(side)}; }
  static EmbodimentEvent expressing(Expression e) { return {Kind::expression, {}, e}; }
  static EmbodimentEvent head_pose(double tilt, double pan) { return {Kind::head_pose, {}, Expression::happy, tilt, pan}; }

  nlohmann::json to_json() const;
  /// Throws ProtocolError on malformed input.
  static EmbodimentEvent from_json(const nlohmann::json& j);
  bool operator==(const EmbodimentEvent&) const = default;
};

struct AgentUtterance {
  std::string button;
  std::string category;
  std::string text;
  std::string rule;  // policy rule that chose the button; empty for the wizard
  std::optional<EmbodimentEvent> expression;

  nlohmann::json to_json() const;
};

/// Side effects of a selection outcome that the session must emit.
struct AgentEffects {
  std::vector<AgentUtterance> utterances;
  std::vector<EmbodimentEvent> embodiment;
  std::vector<CountryId> learned;
};

struct AgentAction {
  enum class Kind { none, select, utter };
  Kind kind = Kind::none;
  CountryId country;   // select
  std::string button;  // utter
  std::string rule;

  bool operator==(const AgentAction&) const = default;
};

struct AgentConfig {
  bool auto_reactions = true;
  Millis gaze_user_ms = 2'000;     // how long a gaze_user lasts
  Millis silence_gaze_ms = 8'000;  // Director silence before a thinking gaze
  double gaze_left_lon = -30.0;
  double gaze_right_lon = 60.0;
  ResolverScores scores;
};

/// Button ids the autonomous policy speaks with.
namespace policy_buttons {
inline constexpr std::string_view confirm = "confirm_1";
inline constexpr std::string_view dont_know = "no_2";
inline constexpr std::string_view clarify = "question_1";
inline constexpr std::string_view need_anchor = "question_3";
inline constexpr std::string_view acknowledge = "backchannel_1";
}  // namespace policy_buttons

/// The Matcher agent of one session, driven by a Wizard or by the
/// rule-based autonomous policy.
class MatcherAgent {
 public:
  MatcherAgent(const WorldMap& map, const DescriptionParser& parser, const Repertoire& repertoire, Variant variant,
               AgentKnowledge knowledge, AgentConfig config = {});

  Variant variant() const { return variant_; }
  const AgentKnowledge& knowledge() const { return knowledge_; }
  const EpisodeResolver& resolver() const { return resolver_; }
  const AgentConfig& config() const { return config_; }

  /// Canonical text for a button; EMBODIED reactions carry their expression.
  /// Throws ButtonError.
  AgentUtterance utter(std::string_view button, std::string rule = {}) const;

  /// A Wizard selection on behalf of the agent. Throws AuthError when the
  /// caller is not the session's wizard; game-core errors pass through.
  SelectionOutcome wizard_select(GameState& game, bool caller_is_wizard, std::string_view country, Millis now,
                                 std::optional<int> episode, AgentEffects& effects);

  /// Selection as the matcher seat (wizard or autonomous), with outcome effects.
  SelectionOutcome select(GameState& game, std::string_view country, Millis now, std::optional<int> episode,
                          AgentEffects& effects);

  /// Reactions and learning for an outcome; advances the episode if needed.
  AgentEffects on_outcome(const SelectionOutcome& outcome);

  /// Rule-based policy over the accumulated Director text of this episode.
  std::vector<AgentAction> autonomous_step(std::string_view director_text);

  bool add_anchor(std::string label, const CountryId& id);
  bool learn(const CountryId& id);
  /// Records a selection made outside select(), e.g. by a remote client.
  void note_selected(const CountryId& id) { tried_.insert(id); }
  void new_episode();

  /// Where the agent looks when it refers to a country, if off-centre.
  std::optional<EmbodimentEvent> gaze_for(const CountryId& id) const;

 private:
  std::vector<CountryId> standing_anchors() const;

  const WorldMap* map_;
  const Repertoire* repertoire_;
  Variant variant_;
  AgentKnowledge knowledge_;
  AgentConfig config_;
  EpisodeResolver resolver_;
  std::optional<CountryId> target_hint_;  // first unknown name heard this episode
  std::set<CountryId> tried_;             // selections made this episode
  int happy_count_ = 0;
  int sad_count_ = 0;
};

}  // namespace rdg
