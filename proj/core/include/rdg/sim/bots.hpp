#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdg/agent/matcher_agent.hpp"
#include "rdg/server/wire.hpp"

namespace rdg {

enum class Strategy { perfect, anchor_navigator, random };
std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view s);  // throws ArgumentError

struct BotPolicy {
  Strategy strategy = Strategy::perfect;
  double knowledge_level = 1.0;  // fraction of countries the bot can name or locate
  Millis latency_ms = 2'000;     // per turn
};

/// Something a bot wants to send after its latency has elapsed.
struct BotSend {
  Millis at = 0;
  int channel = 0;  // bot-local connection index
  MsgKind kind = MsgKind::CHAT;
  nlohmann::json payload = nlohmann::json::object();
  bool connect_play = false;  // open /play before sending
  int epoch = -1;             // director: target epoch the frame belongs to
};

/// Description plan: say the name, establish an anchor by region, size and
/// longitude, then walk to the target in border steps.
std::vector<std::string> navigation_plan(const WorldMap& map, const CountryId& target);

/// navigation_plan with the target-independent work done once per map.
class NavigationPlanner {
 public:
  explicit NavigationPlanner(const WorldMap& map);
  std::vector<std::string> plan(const CountryId& target) const;

 private:
  struct Option {
    std::string region;
    int n = 1;
    Side side = Side::east;
    CountryId anchor;
  };

  const WorldMap* map_;
  std::vector<Option> options_;
  std::map<CountryId, std::array<std::optional<CountryId>, 4>> steps_;  // north, south, east, west
  std::map<CountryId, std::vector<CountryId>> preds_;                  // reverse step edges
};

/// Scripted Director. Reacts to deliveries; never reads hidden state.
class DirectorBot {
 public:
  /// Builds its own planner when none is shared.
  DirectorBot(const WorldMap& map, const Repertoire& repertoire, BotPolicy policy, Variant variant, std::uint64_t seed,
              std::shared_ptr<const NavigationPlanner> planner = nullptr);

  /// Channel 0 is /queue, channel 1 is /play.
  std::vector<BotSend> start(Millis now, const std::string& participant) const;
  /// Outgoing frames triggered by a delivery on `channel` at `now`.
  std::vector<BotSend> on_message(int channel, const WireMessage& m, Millis now);
  /// False for frames planned for a target that has since changed.
  bool still_valid(const BotSend& s) const { return s.epoch < 0 || s.epoch == epoch_; }

  bool ended() const { return ended_; }
  const nlohmann::json& end_payload() const { return end_; }

 private:
  std::vector<BotSend> proceed(Millis now);
  std::string category_of(const WireMessage& m) const;
  BotSend chat(Millis at, std::string text) const;

  const WorldMap* map_;
  const Repertoire* repertoire_;
  BotPolicy policy_;
  Variant variant_;
  std::mt19937_64 rng_;
  std::shared_ptr<const NavigationPlanner> planner_;
  std::optional<CountryId> target_;
  std::vector<std::string> plan_;
  std::size_t plan_pos_ = 0;
  int epoch_ = 0;
  std::string token_;
  bool ended_ = false;
  nlohmann::json end_;
};

enum class MatcherSeat { human, wizard, autonomous };
std::string_view to_string(MatcherSeat s);
MatcherSeat seat_from_string(std::string_view s);  // throws ArgumentError

/// Scripted Matcher in the human seat (/play) or the wizard console.
class MatcherBot {
 public:
  MatcherBot(const WorldMap& map, const DescriptionParser& parser, const Repertoire& repertoire, BotPolicy policy,
             Variant variant, MatcherSeat seat, std::uint64_t seed);

  /// Human seat: channel 0 is /queue, 1 is /play. Wizard seat: 0 is /wizard.
  std::vector<BotSend> start(Millis now, const std::string& participant) const;
  std::vector<BotSend> on_message(int channel, const WireMessage& m, Millis now);

 private:
  std::vector<BotSend> respond(const std::string& text, Millis at);
  BotSend say(Millis at, std::string_view button) const;

  const WorldMap* map_;
  const Repertoire* repertoire_;
  BotPolicy policy_;
  Variant variant_;
  MatcherSeat seat_;
  std::mt19937_64 rng_;
  std::unique_ptr<MatcherAgent> agent_;
  int episode_ = 1;
  std::optional<CountryId> last_selected_;
  std::string token_;
};

}  // namespace rdg
