#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ksr/retrieval.hpp"
#include "ksr/text_corpus.hpp"

namespace ksr {

/// Cumulative top-k accuracy curve of a word classifier.
struct ClassifierProfile {
  std::map<std::size_t, double> topk_accuracy;
  std::size_t vocabulary_size = 100;
  std::size_t k = 10;  // keyword set size to simulate

  /// Throws ConfigError for an empty curve, anchors < 1, values outside
  /// [0, 1] or a decreasing curve.
  void validate() const;

  /// Best reported curve of the masked-contrastive encoder on unseen EEG
  /// (top-1/5/10/15/20 = 8.66/24.90/36.40/46.28/55.15 %).
  static ClassifierProfile masked_contrastive(std::size_t k = 10);
  static ClassifierProfile perfect(std::size_t k = 10);
  /// Uniform guessing over `vocabulary_size` words: acc(r) = r / V.
  static ClassifierProfile uniform(std::size_t vocabulary_size, std::size_t k = 10);
};

/// Probability that the ground truth sits at rank r (p_rank[r - 1]) or is
/// missing from the set entirely.
struct RankDistribution {
  std::vector<double> p_rank;
  double p_miss = 0.0;

  std::size_t k() const { return p_rank.size(); }
};

/// Spreads the mass between consecutive anchors uniformly over the ranks in
/// between (accuracy at rank 0 is 0). Throws ConfigError if the profile's
/// largest anchor is below k.
RankDistribution derive_rank_distribution(const ClassifierProfile& profile);

enum class DistractorMode { uniform, frequency, semantic };

DistractorMode parse_distractor_mode(std::string_view text);

struct DistractorOptions {
  DistractorMode mode = DistractorMode::uniform;
  /// Semantic mode: ordered neighbours per word. Neighbours are drawn first
  /// (uniformly among those in the vocabulary), remaining slots uniformly.
  std::unordered_map<std::string, std::vector<std::string>> neighbours;
};

/// Splitmix64 mix of (master, stream); used for per-sentence sub-seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

/// Draws a keyword set around ground truth `gt`: its rank comes from `dist`,
/// the other slots are distinct distractors from the vocabulary, and the
/// pseudo-probabilities are a softmax over a decreasing linear score.
KeywordSet sample_keyword_set(const std::string& gt, const RankDistribution& dist, const Vocabulary& vocab,
                              std::mt19937_64& rng, const DistractorOptions& options = {});

/// One independently sampled set per in-vocabulary lemma; out-of-vocabulary
/// lemmas are skipped. An empty result means the sentence has nothing to
/// decode.
KeywordSequence simulate_sentence(const ProcessedSentence& sentence, const RankDistribution& dist,
                                  const Vocabulary& vocab, std::mt19937_64& rng,
                                  const DistractorOptions& options = {});

/// Rank (1-based) of `gt` in `set`, or 0 when absent.
std::size_t rank_of(const KeywordSet& set, std::string_view gt);

}  // namespace ksr
