#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdg/resolver/clause.hpp"
#include "rdg/resolver/parser.hpp"

namespace rdg {

/// Only the order exact > chain > fuzzy > partial is contractual.
struct ResolverScores {
  double exact_name = 10.0;
  double chain = 8.0;
  double fuzzy_name = 6.0;
  double partial_per_clause = 3.0;
  double partial_cap = 5.0;  // keeps any partial chain below a fuzzy name
  double confident_min = 6.0;
};

struct ResolutionContext {
  const WorldMap* map = nullptr;
  std::vector<CountryId> anchors;  // most recent last
  std::set<CountryId> known;       // names the resolver may locate
};

struct Candidate {
  CountryId id;
  double score = 0.0;
  std::string derivation;
  std::vector<CountryId> walk;  // origin..end of a relative_step chain; empty otherwise
};

enum class ChainStatus { none, complete, partial, aborted };

struct Resolution {
  std::vector<Candidate> candidates;   // score desc, id asc; no zero scores
  ChainStatus chain = ChainStatus::none;
  std::vector<CountryId> unknown_names;  // named countries outside ctx.known
};

/// Scores chain clauses (in order) and name mentions against the context.
Resolution resolve_detailed(std::span<const Clause> clauses, const ResolutionContext& ctx,
                            const ResolverScores& scores = {});

inline std::vector<Candidate> resolve(std::span<const Clause> clauses, const ResolutionContext& ctx,
                                      const ResolverScores& scores = {}) {
  return resolve_detailed(clauses, ctx, scores).candidates;
}

/// Top candidate beats the runner-up by 2x and reaches `confident_min`.
bool is_confident(std::span<const Candidate> ranked, const ResolverScores& scores = {});

struct EpisodeStep {
  std::string utterance;
  std::vector<Clause> clauses;
  Resolution result;
  std::optional<CountryId> promoted;  // referent that became an anchor
};

/// Folds parse and resolve over the utterances of one target episode.
/// Chain clauses accumulate across utterances until a confident referent
/// is found; that referent becomes the newest anchor.
class EpisodeResolver {
 public:
  EpisodeResolver(const DescriptionParser& parser, ResolutionContext ctx, ResolverScores scores = {});

  const EpisodeStep& feed(std::string_view utterance);

  /// Starts a new target episode with the given standing anchors.
  void reset(std::vector<CountryId> anchors = {});
  void add_anchor(const CountryId& id);
  void add_known(const CountryId& id);

  const ResolutionContext& context() const { return ctx_; }
  const std::vector<Clause>& pending() const { return pending_; }
  const std::vector<Candidate>& candidates() const { return last_.result.candidates; }
  const EpisodeStep& last() const { return last_; }

 private:
  const DescriptionParser* parser_;
  ResolutionContext ctx_;
  ResolverScores scores_;
  std::vector<Clause> pending_;
  EpisodeStep last_;
};

/// Candidates after the last utterance that parsed to any clause; a trailing
/// simile or filler line does not erase the referent.
std::vector<Candidate> resolve_episode(const DescriptionParser& parser, std::span<const std::string> transcript,
                                       const ResolutionContext& ctx, const ResolverScores& scores = {});

}  // namespace rdg
