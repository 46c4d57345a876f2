#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ksr/text_corpus.hpp"

namespace ksr {

struct RankedPrediction {
  std::vector<std::string> candidates;  // best first, distinct
  std::string ground_truth;
};

/// Fraction of predictions whose ground truth is among the first k
/// candidates. Throws std::invalid_argument on empty input or k == 0.
double top_k_accuracy(std::span<const RankedPrediction> predictions, std::size_t k);

struct RetrievalJudgment {
  std::vector<std::string> retrieved;  // ranked sentence ids
  std::vector<std::string> relevant;   // ids equivalent to the ground truth
};

/// 1 when any relevant id is in the top n, else 0.
int recall_at_n(const RetrievalJudgment& judgment, std::size_t n);
/// |relevant ∩ top-n| / n.
double precision_at_n(const RetrievalJudgment& judgment, std::size_t n);
double mean_recall_at_n(std::span<const RetrievalJudgment> judgments, std::size_t n);
double mean_precision_at_n(std::span<const RetrievalJudgment> judgments, std::size_t n);

/// Sentence-level BLEU against one reference: clipped n-gram precisions for
/// n = 1..max_n, weighted geometric mean (uniform weights when `weights` is
/// empty), brevity penalty exp(1 - r/c) when c <= r. No smoothing: any zero
/// precision, or an empty candidate, gives 0.
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t max_n = 4,
            std::span<const double> weights = {});

/// Relevant set of a ground-truth sentence: every corpus sentence with the
/// same preprocessed lemma sequence.
class RelevanceIndex {
 public:
  explicit RelevanceIndex(const CorpusIndex& corpus);

  /// Ids sharing `id`'s lemma sequence (including `id`), ascending. Empty if
  /// `id` is not in the corpus.
  std::vector<std::string> relevant(std::string_view id) const;

 private:
  const CorpusIndex* corpus_;
  std::vector<std::size_t> group_of_;
  std::vector<std::vector<std::string>> groups_;
};

}  // namespace ksr
