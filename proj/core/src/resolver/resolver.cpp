#include "rdg/resolver/resolver.hpp"

#include <algorithm>
#include <map>

#include "rdg/util/errors.hpp"

namespace rdg {
namespace {

std::string join_ids(const std::vector<CountryId>& ids, std::string_view sep) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? std::string(sep) : "") + ids[i];
  return s;
}

std::vector<CountryId> intersect(const std::vector<CountryId>& a, const std::vector<CountryId>& b) {
  std::vector<CountryId> sa = a, sb = b, out;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(out));
  return out;
}

}  // namespace

Resolution resolve_detailed(std::span<const Clause> clauses, const ResolutionContext& ctx,
                            const ResolverScores& scores) {
  if (!ctx.map) throw ArgumentError("resolution context has no map");
  const WorldMap& map = *ctx.map;
  Resolution res;
  std::map<CountryId, Candidate> best;

  auto offer = [&](Candidate c) {
    if (c.score <= 0.0) return;
    auto it = best.find(c.id);
    if (it == best.end() || c.score > it->second.score) best[c.id] = std::move(c);
  };

  // Countries inside every mentioned region; unrestricted when none.
  std::optional<std::vector<CountryId>> region_scope;
  std::optional<CountryId> named_origin;
  for (const auto& c : clauses) {
    if (c.kind == ClauseKind::region_mention && map.has_region(c.region)) {
      const auto& m = map.region_members(c.region);
      region_scope = region_scope ? intersect(*region_scope, m) : m;
    }
    if (c.kind == ClauseKind::name_mention && c.origin && !named_origin && ctx.known.contains(c.country)) {
      named_origin = c.country;
    }
  }
  auto in_scope = [&](const CountryId& id) {
    return !region_scope || std::find(region_scope->begin(), region_scope->end(), id) != region_scope->end();
  };

  // Name mentions.
  for (const auto& c : clauses) {
    if (c.kind != ClauseKind::name_mention) continue;
    if (!map.contains(c.country)) continue;
    if (!ctx.known.contains(c.country)) {
      if (std::find(res.unknown_names.begin(), res.unknown_names.end(), c.country) == res.unknown_names.end())
        res.unknown_names.push_back(c.country);
      continue;
    }
    if (!in_scope(c.country)) continue;
    Candidate cand;
    cand.id = c.country;
    cand.score = c.exact ? scores.exact_name : scores.fuzzy_name;
    cand.derivation = to_string(c);
    offer(std::move(cand));
  }

  // Compositional chain, left to right.
  std::optional<std::vector<CountryId>> set;  // nullopt: unrestricted
  std::vector<std::string> trace;
  std::vector<CountryId> walk;
  int satisfied = 0;
  int chain_clauses = 0;
  bool aborted = false;

  for (const auto& c : clauses) {
    if (!c.is_chain()) continue;
    ++chain_clauses;
    if (aborted) continue;
    switch (c.kind) {
      case ClauseKind::region_mention: {
        if (!map.has_region(c.region)) {
          aborted = true;
          break;
        }
        const auto& m = map.region_members(c.region);
        auto next = set ? intersect(*set, m) : m;
        if (next.empty()) {
          aborted = true;
          break;
        }
        set = std::move(next);
        break;
      }
      case ClauseKind::superlative: {
        auto next = map.largest_of(set ? std::span<const CountryId>(*set) : std::span<const CountryId>(map.selectable()),
                                   c.count);
        if (next.empty()) {
          aborted = true;
          break;
        }
        set = std::move(next);
        break;
      }
      case ClauseKind::extremal: {
        if (!set || set->empty()) {
          aborted = true;
          break;
        }
        set = std::vector<CountryId>{map.extremal_by_longitude(*set, c.side)};
        break;
      }
      case ClauseKind::relative_step: {
        std::optional<CountryId> origin;
        std::string origin_kind;
        if (set && set->size() == 1) {
          origin = set->front();
          origin_kind = "referent";
        } else if (named_origin) {
          origin = named_origin;
          origin_kind = "named";
        } else if (!ctx.anchors.empty()) {
          origin = ctx.anchors.back();
          origin_kind = "anchor";
        }
        if (!origin) {
          aborted = true;
          break;
        }
        std::vector<CountryId> path{*origin};
        for (int k = 0; k < c.count; ++k) {
          auto nxt = map.step_in_direction(path.back(), c.direction);
          if (!nxt) {
            aborted = true;
            break;
          }
          path.push_back(*nxt);
        }
        if (aborted) break;
        if (set && set->size() > 1 && std::find(set->begin(), set->end(), path.back()) == set->end()) {
          aborted = true;
          break;
        }
        trace.push_back(origin_kind + " " + *origin);
        if (walk.empty()) {
          walk = path;
        } else {
          walk.insert(walk.end(), path.begin() + 1, path.end());
        }
        set = std::vector<CountryId>{path.back()};
        break;
      }
      case ClauseKind::name_mention: break;
    }
    if (!aborted) {
      ++satisfied;
      if (c.kind == ClauseKind::relative_step) {
        trace.back() += " " + to_string(c) + " -> " + join_ids(walk, ">");
      } else {
        trace.push_back(to_string(c));
      }
    }
  }

  if (chain_clauses > 0) {
    const std::string steps = join_ids(trace, " | ");
    if (!aborted && set && set->size() == 1) {
      res.chain = ChainStatus::complete;
      Candidate cand;
      cand.id = set->front();
      cand.score = scores.chain;
      cand.derivation = "chain: " + steps;
      cand.walk = walk;
      if (in_scope(cand.id)) offer(std::move(cand));
    } else {
      res.chain = aborted ? ChainStatus::aborted : ChainStatus::partial;
      if (set && satisfied > 0) {
        const double s = std::min(scores.partial_per_clause * satisfied, scores.partial_cap);
        const std::string d = "partial " + std::to_string(satisfied) + "/" + std::to_string(chain_clauses) + ": " + steps;
        for (const auto& id : *set) {
          if (!in_scope(id)) continue;
          offer(Candidate{id, s, d, set->size() == 1 ? walk : std::vector<CountryId>{}});
        }
      }
    }
  }

  for (auto& [id, c] : best) res.candidates.push_back(std::move(c));
  std::stable_sort(res.candidates.begin(), res.candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return res;
}

bool is_confident(std::span<const Candidate> ranked, const ResolverScores& scores) {
  if (ranked.empty() || ranked[0].score < scores.confident_min) return false;
  return ranked.size() == 1 || ranked[0].score >= 2.0 * ranked[1].score;
}

EpisodeResolver::EpisodeResolver(const DescriptionParser& parser, ResolutionContext ctx, ResolverScores scores)
    : parser_(&parser), ctx_(std::move(ctx)), scores_(scores) {
  if (!ctx_.map) ctx_.map = &parser.map();
}

const EpisodeStep& EpisodeResolver::feed(std::string_view utterance) {
  EpisodeStep step;
  step.utterance = std::string(utterance);
  step.clauses = parser_->parse(utterance);

  std::vector<Clause> names, fresh;
  for (const auto& c : step.clauses) (c.is_chain() ? fresh : names).push_back(c);

  auto attempt = pending_;
  attempt.insert(attempt.end(), fresh.begin(), fresh.end());
  auto run = [&](const std::vector<Clause>& chain) {
    std::vector<Clause> all = chain;
    all.insert(all.end(), names.begin(), names.end());
    return resolve_detailed(all, ctx_, scores_);
  };
  step.result = run(attempt);
  // Stale clauses from earlier utterances must not sink a fresh description.
  if (step.result.chain == ChainStatus::aborted && !pending_.empty() && !fresh.empty()) {
    attempt = fresh;
    step.result = run(attempt);
  }
  pending_ = std::move(attempt);

  if (is_confident(step.result.candidates, scores_)) {
    const auto& top = step.result.candidates.front().id;
    if (ctx_.anchors.empty() || ctx_.anchors.back() != top) ctx_.anchors.push_back(top);
    step.promoted = top;
    pending_.clear();
  }
  last_ = std::move(step);
  return last_;
}

void EpisodeResolver::reset(std::vector<CountryId> anchors) {
  ctx_.anchors = std::move(anchors);
  pending_.clear();
  last_ = EpisodeStep{};
}

void EpisodeResolver::add_anchor(const CountryId& id) {
  if (!ctx_.map->contains(id)) throw NotFoundError("unknown country '" + id + "'");
  if (ctx_.anchors.empty() || ctx_.anchors.back() != id) ctx_.anchors.push_back(id);
}

void EpisodeResolver::add_known(const CountryId& id) { ctx_.known.insert(id); }

std::vector<Candidate> resolve_episode(const DescriptionParser& parser, std::span<const std::string> transcript,
                                       const ResolutionContext& ctx, const ResolverScores& scores) {
  EpisodeResolver ep(parser, ctx, scores);
  std::vector<Candidate> out;
  for (const auto& u : transcript) {
    const auto& step = ep.feed(u);
    if (!step.clauses.empty()) out = step.result.candidates;
  }
  return out;
}

}  // namespace rdg
