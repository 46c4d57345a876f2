#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ksr/scoring.hpp"
#include "ksr/text_corpus.hpp"

namespace ksr {

struct KeywordCandidate {
  std::string word;
  double probability = 0.0;

  bool operator==(const KeywordCandidate&) const = default;
};

/// Top-k candidates for one word position, most probable first.
struct KeywordSet {
  std::vector<KeywordCandidate> candidates;
  std::size_t position = 0;

  std::size_t k() const { return candidates.size(); }
  /// Throws DataError unless k >= 1, probabilities lie in (0, 1] and do not
  /// increase, and words are distinct and non-empty.
  void validate() const;

  bool operator==(const KeywordSet&) const = default;
};

struct KeywordSequence {
  std::string sentence_id;
  std::vector<KeywordSet> sets;

  /// Validates every set and checks positions are 0..L-1.
  void validate() const;

  bool operator==(const KeywordSequence&) const = default;
};

struct ScoredQuery {
  CombinationQuery query;
  QueryScore score;

  bool operator==(const ScoredQuery&) const = default;
};

/// Retained queries, best first; ties broken by ascending keyword list.
struct Beam {
  std::vector<ScoredQuery> queries;
  std::size_t capacity = 1;

  /// q^0: a single empty query.
  static Beam initial(std::size_t capacity);
};

struct BeamOptions {
  std::size_t beam_width = 10;
  std::size_t k_used = std::numeric_limits<std::size_t>::max();
  std::size_t max_results = 10;
  /// Score candidates from state kept per beam entry (occurrence counts, or
  /// the last edit-distance row per sentence) instead of rescoring from
  /// scratch. Produces the same QueryScore; TF-IDF always rescores.
  bool incremental = true;
};

struct RetrievalResult {
  struct Metadata {
    std::size_t num_sets = 0;
    std::size_t k = 0;
    std::size_t beam_width = 0;
    ScorerKind scorer = ScorerKind::aho_corasick;
    std::string strategy;

    bool operator==(const Metadata&) const = default;
  };

  std::string sentence_id;
  std::vector<SentenceScore> ranked;
  std::vector<ScoredQuery> best_queries;
  Metadata metadata;

  bool operator==(const RetrievalResult&) const = default;
};

/// Results are padded to at least this many sentences when the corpus allows.
inline constexpr std::size_t kMinResults = 5;

/// Extends every beam query by each of the first `k_used` candidates of `set`
/// (beam-major, candidate-minor order). Provenance records (set_index, rank).
std::vector<CombinationQuery> expand(const Beam& beam, const KeywordSet& set, std::size_t set_index,
                                     std::size_t k_used = std::numeric_limits<std::size_t>::max());

/// Orders scored queries best first (score, then keyword list) and keeps `m`.
Beam prune(std::vector<ScoredQuery> scored, const Scorer& scorer, std::size_t m);
/// Scores every candidate with `scorer`, then prunes.
Beam prune(const std::vector<CombinationQuery>& candidates, const Scorer& scorer, std::size_t m);

/// True when `a` belongs ahead of `b` in a beam.
bool beam_order(const ScoredQuery& a, const ScoredQuery& b, const Scorer& scorer);

class Retriever {
 public:
  explicit Retriever(const Scorer& scorer) : scorer_(&scorer) {}

  const Scorer& scorer() const { return *scorer_; }

  /// Beam search retrieval: expand -> score -> prune over all L sets, then
  /// rank the corpus with the best final query and pad with the other final
  /// queries' hits. Throws DataError when the sequence has no sets.
  RetrievalResult beam_search(const KeywordSequence& sequence, const BeamOptions& options = {}) const;

  /// Greedy baseline: one query from every set's top-1 candidate.
  RetrievalResult greedy(const KeywordSequence& sequence, std::size_t max_results = 10) const;

 private:
  Beam run_beam(const KeywordSequence& sequence, const BeamOptions& options) const;
  Beam run_beam_incremental(const KeywordSequence& sequence, const BeamOptions& options) const;
  Beam run_beam_levenshtein(const KeywordSequence& sequence, const BeamOptions& options) const;
  std::vector<SentenceScore> assemble_ranking(const std::vector<ScoredQuery>& final_queries,
                                              std::size_t max_results) const;

  const Scorer* scorer_;
};

}  // namespace ksr
