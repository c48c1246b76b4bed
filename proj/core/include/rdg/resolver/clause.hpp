#pragma once

#include <string>

#include "rdg/world/world_map.hpp"

namespace rdg {

enum class ClauseKind { name_mention, region_mention, superlative, extremal, relative_step };

/// One recognized piece of a Director description.
struct Clause {
  ClauseKind kind = ClauseKind::name_mention;
  CountryId country;  // name_mention
  bool exact = true;  // name_mention: false for an edit-distance match
  int distance = 0;   // name_mention: edit distance of a fuzzy match
  bool origin = false; // name_mention: "from X", the start of a relative step
  std::string region; // region_mention
  int count = 1;      // superlative size / relative_step repetitions
  Side side = Side::east;
  Direction direction = Direction::south;
  std::string span;   // matched source text, for traces

  static Clause name(CountryId id, bool exact = true, int distance = 0);
  static Clause in_region(std::string tag);
  static Clause largest(int n);
  static Clause extreme(Side s);
  static Clause step(Direction d, int count);

  bool is_chain() const { return kind != ClauseKind::name_mention; }
};

/// Semantic equality; ignores `span`.
bool operator==(const Clause& a, const Clause& b);

/// e.g. "superlative(size,3)", "relative_step(south,2)", "name_mention(EGY)".
std::string to_string(const Clause& c);

}  // namespace rdg
