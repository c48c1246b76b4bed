#include "rdg/resolver/clause.hpp"

namespace rdg {

Clause Clause::name(CountryId id, bool exact, int distance) {
  Clause c;
  c.kind = ClauseKind::name_mention;
  c.country = std::move(id);
  c.exact = exact;
  c.distance = distance;
  return c;
}

Clause Clause::in_region(std::string tag) {
  Clause c;
  c.kind = ClauseKind::region_mention;
  c.region = std::move(tag);
  return c;
}

Clause Clause::largest(int n) {
  Clause c;
  c.kind = ClauseKind::superlative;
  c.count = n;
  return c;
}

Clause Clause::extreme(Side s) {
  Clause c;
  c.kind = ClauseKind::extremal;
  c.side = s;
  return c;
}

Clause Clause::step(Direction d, int count) {
  Clause c;
  c.kind = ClauseKind::relative_step;
  c.direction = d;
  c.count = count;
  return c;
}

bool operator==(const Clause& a, const Clause& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ClauseKind::name_mention:
      return a.country == b.country && a.exact == b.exact && a.distance == b.distance && a.origin == b.origin;
    case ClauseKind::region_mention: return a.region == b.region;
    case ClauseKind::superlative: return a.count == b.count;
    case ClauseKind::extremal: return a.side == b.side;
    case ClauseKind::relative_step: return a.direction == b.direction && a.count == b.count;
  }
  return false;
}

std::string to_string(const Clause& c) {
  switch (c.kind) {
    case ClauseKind::name_mention:
      return "name_mention(" + c.country + (c.exact ? "" : ",fuzzy:" + std::to_string(c.distance)) +
             (c.origin ? ",from" : "") + ")";
    case ClauseKind::region_mention: return "region_mention(" + c.region + ")";
    case ClauseKind::superlative: return "superlative(size," + std::to_string(c.count) + ")";
    case ClauseKind::extremal: return "extremal(" + std::string(to_string(c.side)) + ")";
    case ClauseKind::relative_step:
      return "relative_step(" + std::string(to_string(c.direction)) + "," + std::to_string(c.count) + ")";
  }
  return "?";
}

}  // namespace rdg
