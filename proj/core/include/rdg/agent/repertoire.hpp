#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rdg/game/game_state.hpp"

namespace rdg {

struct UtteranceButton {
  std::string id;
  std::string category;
  std::string text;
  bool web = false;
  bool embodied = false;

  bool available(Variant v) const { return v == Variant::web ? web : embodied; }
};

/// The Wizard's fixed button grid. Agents never say anything else.
class Repertoire {
 public:
  static const std::vector<std::string>& categories();

  /// Throws LoadError unless WEB has exactly 23 buttons over the eight base
  /// categories and EMBODIED adds exactly 3 situation fixes and 2+2 reactions.
  static Repertoire parse(std::string_view json_text);
  static Repertoire load(const std::filesystem::path& path);

  /// Throws ButtonError for unknown ids and ids unavailable in `v`.
  const UtteranceButton& button(std::string_view id, Variant v) const;
  const UtteranceButton* find(std::string_view id) const;
  std::vector<const UtteranceButton*> available(Variant v) const;

  /// SHA-256 of the source bytes.
  const std::string& version() const { return version_; }
  const std::string& source() const { return source_; }

 private:
  std::vector<UtteranceButton> buttons_;
  std::string version_;
  std::string source_;
};

}  // namespace rdg
