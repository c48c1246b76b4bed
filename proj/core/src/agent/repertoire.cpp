#include "rdg/agent/repertoire.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "rdg/util/errors.hpp"
#include "rdg/util/sha256.hpp"
#include "rdg/util/text.hpp"

namespace rdg {

const std::vector<std::string>& Repertoire::categories() {
  static const std::vector<std::string> kCategories = {
      "opening", "closing", "confirmation", "backchannel", "yes", "no", "game_statement", "game_question",
      "situation_fix", "reaction_happy", "reaction_sad"};
  return kCategories;
}

Repertoire Repertoire::parse(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("repertoire is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("buttons") || !doc["buttons"].is_array())
    throw LoadError("repertoire must be an object with a 'buttons' array");

  const auto& cats = categories();
  const std::set<std::string> base(cats.begin(), cats.begin() + 8);
  Repertoire r;
  std::set<std::string> ids;
  for (const auto& b : doc["buttons"]) {
    UtteranceButton u;
    try {
      u.id = b.at("id").get<std::string>();
      u.category = b.at("category").get<std::string>();
      u.text = b.at("text").get<std::string>();
      for (const auto& v : b.at("variants")) {
        const auto variant = variant_from_string(v.get<std::string>());
        (variant == Variant::web ? u.web : u.embodied) = true;
      }
    } catch (const nlohmann::json::exception& e) {
      throw LoadError("repertoire button is malformed: " + std::string(e.what()));
    } catch (const ArgumentError& e) {
      throw LoadError("repertoire button '" + u.id + "': " + e.what());
    }
    if (u.id.empty() || u.text.empty()) throw LoadError("repertoire button with empty id or text");
    if (!ids.insert(u.id).second) throw LoadError("duplicate button id '" + u.id + "'");
    if (std::find(cats.begin(), cats.end(), u.category) == cats.end())
      throw LoadError("button '" + u.id + "' has unknown category '" + u.category + "'");
    if (u.web && !base.contains(u.category))
      throw LoadError("button '" + u.id + "' of category " + u.category + " cannot be offered in WEB");
    if (u.web && !u.embodied) throw LoadError("WEB button '" + u.id + "' missing from EMBODIED");
    r.buttons_.push_back(std::move(u));
  }

  std::map<std::string, int> web_by_cat, embodied_only;
  int web_total = 0;
  for (const auto& u : r.buttons_) {
    if (u.web) {
      ++web_total;
      ++web_by_cat[u.category];
    } else if (u.embodied) {
      ++embodied_only[u.category];
    }
  }
  if (web_total != 23) throw LoadError("WEB repertoire must have 23 buttons, found " + std::to_string(web_total));
  for (const auto& c : base) {
    if (web_by_cat[c] == 0) throw LoadError("WEB repertoire has no " + c + " button");
  }
  const std::map<std::string, int> want = {{"situation_fix", 3}, {"reaction_happy", 2}, {"reaction_sad", 2}};
  for (const auto& [c, n] : embodied_only) {
    if (!want.contains(c)) throw LoadError("EMBODIED-only button of category " + c);
  }
  for (const auto& [c, n] : want) {
    if (embodied_only[c] != n)
      throw LoadError("EMBODIED must add " + std::to_string(n) + " " + c + " buttons, found " +
                      std::to_string(embodied_only[c]));
  }
  r.source_ = std::string(json_text);
  r.version_ = sha256_hex(json_text);
  return r;
}

Repertoire Repertoire::load(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const StorageError& e) {
    throw LoadError(e.what());
  }
  return parse(bytes);
}

const UtteranceButton* Repertoire::find(std::string_view id) const {
  for (const auto& b : buttons_) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

const UtteranceButton& Repertoire::button(std::string_view id, Variant v) const {
  const auto* b = find(id);
  if (!b) throw ButtonError("unknown button '" + std::string(id) + "'");
  if (!b->available(v))
    throw ButtonError("button '" + std::string(id) + "' is not available in " + std::string(to_string(v)));
  return *b;
}

std::vector<const UtteranceButton*> Repertoire::available(Variant v) const {
  std::vector<const UtteranceButton*> out;
  for (const auto& b : buttons_) {
    if (b.available(v)) out.push_back(&b);
  }
  return out;
}

}  // namespace rdg
