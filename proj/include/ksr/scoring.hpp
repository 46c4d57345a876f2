#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksr/text_corpus.hpp"

namespace ksr {

enum class CountMode { multiplicity, distinct };
enum class ScorerKind { aho_corasick, levenshtein, tfidf };

std::string_view to_string(CountMode mode);
std::string_view to_string(ScorerKind kind);
/// Accepts "multiplicity" / "distinct".
CountMode parse_count_mode(std::string_view text);
/// Accepts "ac", "ld", "tfidf" (and the long names).
ScorerKind parse_scorer(std::string_view text);

struct KeywordOrigin {
  std::size_t set_index = 0;
  std::size_t rank = 0;

  bool operator==(const KeywordOrigin&) const = default;
};

/// One keyword per consumed keyword set, in set order. Scoring treats the
/// keywords as a bag except for Levenshtein, which is order-sensitive.
struct CombinationQuery {
  std::vector<std::string> keywords;
  std::vector<KeywordOrigin> provenance;

  bool operator==(const CombinationQuery&) const = default;
};

struct SentenceScore {
  SentenceIndex sentence = 0;
  double score = 0.0;

  bool operator==(const SentenceScore&) const = default;
};

/// Query-corpus relevance H(q, C).
///
/// `per_sentence` holds the best min(m_score, N) sentences in rank order. For
/// the occurrence and TF-IDF scorers only sentences with a positive score are
/// listed; `value` is always the sum over the listed scores divided by
/// min(m_score, N), so unlisted sentences contribute zero.
struct QueryScore {
  double value = 0.0;
  std::vector<SentenceScore> per_sentence;

  bool operator==(const QueryScore&) const = default;
};

/// Token-level edit distance with unit insert/delete/substitute costs.
template <class T>
std::size_t levenshtein_distance(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i + 1;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t up = row[j + 1];
      const std::size_t sub = diag + (a[i] == b[j] ? 0 : 1);
      row[j + 1] = std::min({up + 1, row[j] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein_score(const CombinationQuery& query, const ProcessedSentence& sentence);

/// idf(t) = ln(N / df(t)) over the indexed corpus; sentence vectors are
/// tf * idf with precomputed norms. Query keywords absent from the corpus
/// have no defined idf and get weight zero.
class TfidfModel {
 public:
  explicit TfidfModel(const CorpusIndex& corpus);

  double idf(TermId term) const { return idf_.at(term); }
  double sentence_norm(SentenceIndex s) const { return norms_.at(s); }
  const CorpusIndex& corpus() const { return *corpus_; }

  /// Cosine similarity in [0, 1]; zero when either vector has zero norm.
  double score(const CombinationQuery& query, SentenceIndex sentence) const;
  /// Cosine against every sentence sharing a term with the query, as a sparse
  /// list ordered by sentence.
  std::vector<SentenceScore> score_all(const CombinationQuery& query) const;

 private:
  struct QueryVector {
    std::vector<std::pair<TermId, double>> weights;
    double norm = 0.0;
  };
  QueryVector query_vector(const CombinationQuery& query) const;

  const CorpusIndex* corpus_;
  std::vector<double> idf_;
  std::vector<double> norms_;
};

double tfidf_score(const CombinationQuery& query, SentenceIndex sentence, const TfidfModel& model);

/// Which sentences the occurrence scorer visits.
enum class Pruning { inverted_index, full_scan };

/// Per-sentence keyword occurrence counts computed with an Aho-Corasick
/// automaton over the query keywords. Returned sparse (positive counts only),
/// ordered by sentence. Throws std::invalid_argument on an empty query.
std::vector<SentenceScore> occurrence_counts(const CombinationQuery& query, const CorpusIndex& corpus,
                                             CountMode mode, Pruning pruning = Pruning::inverted_index);

QueryScore ac_score(const CombinationQuery& query, const CorpusIndex& corpus, std::size_t m_score,
                    CountMode mode, Pruning pruning = Pruning::inverted_index);

struct ScorerOptions {
  ScorerKind kind = ScorerKind::aho_corasick;
  std::size_t m_score = 5;
  CountMode count_mode = CountMode::multiplicity;
};

/// Binds a scoring method to an immutable corpus. Thread-safe for concurrent
/// const use.
class Scorer {
 public:
  Scorer(const CorpusIndex& corpus, ScorerOptions options);

  const CorpusIndex& corpus() const { return *corpus_; }
  const ScorerOptions& options() const { return options_; }
  bool lower_is_better() const { return options_.kind == ScorerKind::levenshtein; }

  /// True when score `a` ranks strictly ahead of `b`.
  bool better(double a, double b) const { return lower_is_better() ? a < b : a > b; }

  QueryScore score(const CombinationQuery& query) const;
  /// Every corpus sentence, best first, ties by ascending sentence id.
  std::vector<SentenceScore> rank(const CombinationQuery& query) const;
  /// Sentences the query actually hits (positive count or similarity; every
  /// sentence for Levenshtein), best first.
  std::vector<SentenceScore> hits(const CombinationQuery& query) const;

 private:
  std::vector<SentenceScore> sparse_scores(const CombinationQuery& query) const;
  void sort_ranked(std::vector<SentenceScore>& scores) const;

  const CorpusIndex* corpus_;
  ScorerOptions options_;
  std::unique_ptr<TfidfModel> tfidf_;
};

/// Brute-force convenience: rank the whole corpus with one method.
std::vector<SentenceScore> rank_sentences(const CombinationQuery& query, const CorpusIndex& corpus,
                                          ScorerOptions options);

/// Builds H(q, C) from a ranked hit list: top min(m_score, corpus_size)
/// entries, value = their sum / min(m_score, corpus_size).
QueryScore summarize(std::vector<SentenceScore> ranked_hits, std::size_t m_score, std::size_t corpus_size);

}  // namespace ksr
