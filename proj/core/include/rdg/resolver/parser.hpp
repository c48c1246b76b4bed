#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rdg/resolver/clause.hpp"

namespace rdg {

/// Keyword and pattern grammar for Director descriptions.
///
/// Clauses come back grouped in a fixed order regardless of word order:
/// regions, superlative, extremal, relative steps (in text order), then
/// name mentions (in text order). Restrictions thus always apply before
/// picks within an utterance.
class DescriptionParser {
 public:
  explicit DescriptionParser(const WorldMap& map);

  std::vector<Clause> parse(std::string_view text) const;

  const WorldMap& map() const { return *map_; }

 private:
  struct Entry {
    std::vector<std::string> tokens;
    std::string target;  // country id or region tag
    bool region = false;
  };
  struct FuzzyName {
    std::string key;  // normalized name with spaces removed
    std::size_t words = 1;
    CountryId id;
  };

  const WorldMap* map_;
  std::vector<Entry> lexicon_;
  std::vector<FuzzyName> fuzzy_;
  std::vector<std::string> continents_;
  std::size_t max_phrase_ = 1;
};

}  // namespace rdg
