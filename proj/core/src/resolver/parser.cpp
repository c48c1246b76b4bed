#include "rdg/resolver/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>

#include "rdg/util/text.hpp"

namespace rdg {
namespace {

struct Token {
  std::string raw;
  std::string low;
  bool used = false;
};

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

std::vector<Token> tokenize(std::string_view text) {
  static const std::set<std::string, std::less<>> kFillers = {"um", "uh", "uhm", "umm", "erm", "er", "hmm", "mm"};
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) continue;
    Token t;
    t.raw = std::string(text.substr(start, i - start));
    t.low = casefold(t.raw);
    if (!kFillers.contains(t.low)) out.push_back(std::move(t));
  }
  return out;
}

std::optional<int> count_word(std::string_view w) {
  static const std::map<std::string, int, std::less<>> kWords = {
      {"one", 1}, {"two", 2}, {"three", 3}, {"four", 4}, {"five", 5}, {"six", 6}, {"seven", 7},
      {"eight", 8}, {"nine", 9}, {"ten", 10}, {"once", 1}, {"twice", 2}};
  if (auto it = kWords.find(w); it != kWords.end()) return it->second;
  if (!w.empty() && w.size() <= 2 && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const int n = std::stoi(std::string(w));
    if (n >= 1 && n <= 10) return n;
  }
  return std::nullopt;
}

std::optional<Direction> direction_word(std::string_view w) {
  static const std::map<std::string, Direction, std::less<>> kDirs = {
      {"down", Direction::south}, {"south", Direction::south}, {"below", Direction::south},
      {"up", Direction::north},   {"north", Direction::north}, {"above", Direction::north},
      {"right", Direction::east}, {"east", Direction::east},
      {"left", Direction::west},  {"west", Direction::west}};
  if (auto it = kDirs.find(w); it != kDirs.end()) return it->second;
  return std::nullopt;
}

std::optional<Side> side_word(std::string_view w) {
  if (w == "right" || w == "east" || w == "eastern") return Side::east;
  if (w == "left" || w == "west" || w == "western") return Side::west;
  return std::nullopt;
}

bool step_trigger(std::string_view w) {
  static const std::set<std::string, std::less<>> kVerbs = {"go", "goes", "going", "move", "moving",
                                                            "step", "head", "then", "next"};
  return kVerbs.contains(w);
}

// Words that sit within edit distance of a country name but are ordinary
// English in descriptions.
bool fuzzy_stopword(std::string_view w) {
  static const std::set<std::string, std::less<>> kStop = {
      "child", "there", "where", "these", "those", "three", "think", "right", "which", "sedan",
      "about", "above", "below", "first", "second", "third", "biggest", "largest", "country",
      "countries", "north", "south", "eastern", "western", "northern", "southern", "middle"};
  return kStop.contains(w);
}

// Directional prefixes that turn a continent into a subregion.
struct RegionPrefix {
  std::vector<std::string> words;
  std::string adjective;  // "" keeps the continent itself
};

const std::vector<RegionPrefix>& region_prefixes() {
  static const std::vector<RegionPrefix> kPrefixes = [] {
    std::vector<RegionPrefix> v;
    auto add = [&v](std::string phrase, std::string adj) { v.push_back({word_tokens(phrase), std::move(adj)}); };
    for (const char* p : {"top of", "top part of", "north of", "northern part of", "northern", "north", "upper"})
      add(p, "Northern");
    for (const char* p : {"bottom of", "bottom part of", "south of", "southern part of", "southern", "south", "lower"})
      add(p, "Southern");
    for (const char* p : {"east of", "eastern part of", "eastern", "east", "right side of"}) add(p, "Eastern");
    for (const char* p : {"west of", "western part of", "western", "west", "left side of"}) add(p, "Western");
    for (const char* p : {"middle of", "center of", "centre of", "central", "heart of"}) add(p, "");
    return v;
  }();
  return kPrefixes;
}

bool matches_at(const std::vector<Token>& toks, std::size_t i, const std::vector<std::string>& words) {
  if (i + words.size() > toks.size()) return false;
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (toks[i + k].used || toks[i + k].low != words[k]) return false;
  }
  return true;
}

}  // namespace

DescriptionParser::DescriptionParser(const WorldMap& map) : map_(&map) {
  std::set<std::string> continents;
  for (const auto& [id, c] : map.countries()) {
    auto add = [&](const std::string& phrase) {
      Entry e{word_tokens(phrase), id, false};
      if (e.tokens.empty()) return;
      max_phrase_ = std::max(max_phrase_, e.tokens.size());
      lexicon_.push_back(std::move(e));
      std::string key;
      for (const auto& t : word_tokens(phrase)) key += t;
      fuzzy_.push_back({key, word_tokens(phrase).size(), id});
    };
    add(c.name);
    for (const auto& a : c.aliases) add(a);
    if (!c.continent.empty()) continents.insert(c.continent);
  }
  auto add_region = [&](const std::string& phrase, const std::string& tag) {
    if (!map.has_region(tag)) return;
    Entry e{word_tokens(phrase), tag, true};
    max_phrase_ = std::max(max_phrase_, e.tokens.size());
    lexicon_.push_back(std::move(e));
  };
  for (const auto& tag : map.region_tags()) add_region(tag, tag);
  add_region("north america", "Northern America");
  add_region("middle east", "Western Asia");
  add_region("southeast asia", "South-Eastern Asia");
  continents_.assign(continents.begin(), continents.end());
}

std::vector<Clause> DescriptionParser::parse(std::string_view text) const {
  auto toks = tokenize(text);
  std::vector<Clause> regions, superlatives, extremals, steps, names;

  auto span_of = [&](std::size_t i, std::size_t n) {
    std::string s;
    for (std::size_t k = i; k < i + n; ++k) s += (k == i ? "" : " ") + toks[k].raw;
    return s;
  };

  // Pass 1: names and regions, longest match first.
  for (std::size_t i = 0; i < toks.size();) {
    std::size_t best_len = 0;
    int best_rank = -1;  // 2 country, 1 region tag, 0 directional region
    std::string best_target;
    bool best_region = false;

    auto offer = [&](std::size_t len, int rank, const std::string& target, bool region) {
      if (len > best_len || (len == best_len && rank > best_rank)) {
        best_len = len;
        best_rank = rank;
        best_target = target;
        best_region = region;
      }
    };
    for (const auto& e : lexicon_) {
      if (matches_at(toks, i, e.tokens)) offer(e.tokens.size(), e.region ? 1 : 2, e.target, e.region);
    }
    for (const auto& p : region_prefixes()) {
      if (!matches_at(toks, i, p.words)) continue;
      for (const auto& cont : continents_) {
        auto words = p.words;
        for (auto& w : word_tokens(cont)) words.push_back(w);
        if (!matches_at(toks, i, words)) continue;
        std::string tag = cont;
        if (!p.adjective.empty() && map_->has_region(p.adjective + " " + cont)) tag = p.adjective + " " + cont;
        offer(words.size(), 0, tag, true);
      }
    }
    // Three-letter country codes count only when written in capitals.
    if (best_len == 0 && toks[i].raw.size() == 3 &&
        std::all_of(toks[i].raw.begin(), toks[i].raw.end(), [](char c) { return c >= 'A' && c <= 'Z'; }) &&
        map_->contains(toks[i].raw)) {
      offer(1, 2, toks[i].raw, false);
    }

    if (best_len > 0) {
      Clause c = best_region ? Clause::in_region(best_target) : Clause::name(best_target);
      c.origin = !best_region && i > 0 && toks[i - 1].low == "from";
      c.span = span_of(i, best_len);
      (best_region ? regions : names).push_back(std::move(c));
      for (std::size_t k = i; k < i + best_len; ++k) toks[k].used = true;
      i += best_len;
      continue;
    }

    // Fuzzy single- or two-word name.
    const auto& w = toks[i].low;
    if (w.size() >= 5 && !fuzzy_stopword(w) && !count_word(w) && !direction_word(w)) {
      const FuzzyName* best = nullptr;
      std::size_t best_d = 99;
      for (const auto& f : fuzzy_) {
        std::string probe = w;
        if (f.words == 2) {
          if (i + 1 >= toks.size() || toks[i + 1].used) continue;
          probe += toks[i + 1].low;
        } else if (f.words != 1) {
          continue;
        }
        if (f.key.empty() || f.key[0] != probe[0]) continue;
        const std::size_t limit = f.key.size() < 8 ? 1 : 2;
        const std::size_t lo = f.key.size() > limit ? f.key.size() - limit : 0;
        if (probe.size() < lo || probe.size() > f.key.size() + limit) continue;
        const std::size_t d = edit_distance(probe, f.key);
        if (d == 0 || d > limit) continue;
        if (d < best_d || (d == best_d && best && f.id < best->id)) {
          best = &f;
          best_d = d;
        }
      }
      if (best) {
        Clause c = Clause::name(best->id, false, static_cast<int>(best_d));
        c.origin = i > 0 && toks[i - 1].low == "from";
        c.span = span_of(i, best->words);
        names.push_back(std::move(c));
        for (std::size_t k = i; k < i + best->words; ++k) toks[k].used = true;
        i += best->words;
        continue;
      }
    }
    ++i;
  }

  // Pass 2: size superlatives and longitude extremes.
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].used) continue;
    const auto& w = toks[i].low;
    if (w == "biggest" || w == "largest") {
      int n = 1;
      for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
        if (auto k = count_word(toks[i - back].low)) {
          n = *k;
          break;
        }
      }
      toks[i].used = true;
      Clause c = Clause::largest(n);
      c.span = toks[i].raw;
      superlatives.push_back(std::move(c));
      continue;
    }
    if (w == "rightmost" || w == "easternmost" || w == "leftmost" || w == "westernmost") {
      toks[i].used = true;
      Clause c = Clause::extreme(w == "rightmost" || w == "easternmost" ? Side::east : Side::west);
      c.span = toks[i].raw;
      extremals.push_back(std::move(c));
      continue;
    }
    if (w == "furthest" || w == "farthest" || w == "most" || w == "far") {
      for (std::size_t k = i + 1; k <= i + 2 && k < toks.size(); ++k) {
        if (toks[k].used) break;
        if (auto s = side_word(toks[k].low)) {
          Clause c = Clause::extreme(*s);
          c.span = span_of(i, k - i + 1);
          extremals.push_back(std::move(c));
          for (std::size_t m = i; m <= k; ++m) toks[m].used = true;
          break;
        }
      }
    }
  }

  // Pass 3: relative steps. A direction word counts only next to a motion
  // verb or a count ("go down", "two down", "one to the right").
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].used) continue;
    auto dir = direction_word(toks[i].low);
    if (!dir) continue;
    std::optional<int> n;
    bool trigger = false;
    for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
      const auto& t = toks[i - back];
      if (t.used) break;
      if (auto k = count_word(t.low); k && !n) n = k;
      if (step_trigger(t.low)) {
        trigger = true;
        break;
      }
    }
    std::size_t end = i;
    if (!n && i + 1 < toks.size() && !toks[i + 1].used) {
      if (auto k = count_word(toks[i + 1].low)) {
        n = k;
        end = i + 1;
      }
    }
    if (!n && !trigger) continue;
    for (std::size_t k = i; k <= end; ++k) toks[k].used = true;
    Clause c = Clause::step(*dir, n.value_or(1));
    c.span = span_of(i, end - i + 1);
    steps.push_back(std::move(c));
  }

  std::vector<Clause> out;
  for (auto* group : {&regions, &superlatives, &extremals, &steps, &names}) {
    for (auto& c : *group) out.push_back(std::move(c));
  }
  return out;
}

}  // namespace rdg
