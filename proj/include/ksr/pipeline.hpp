#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ksr/evaluation.hpp"
#include "ksr/retrieval.hpp"
#include "ksr/simulator.hpp"
#include "ksr/text_corpus.hpp"

namespace ksr {

/// Preprocess raw sentences, build the top-V vocabulary and the index.
CorpusIndex index_corpus(const std::vector<RawSentence>& raw, const LemmaDictionary& dict, const StopwordList& stop,
                         std::size_t vocabulary_size, std::vector<std::string>* warnings = nullptr);

/// Simulated keyword sequences for every corpus sentence with at least
/// `min_sets` in-vocabulary lemmas. Sentence i draws from
/// derive_seed(seed, i), so the output for one sentence does not depend on
/// the others.
std::vector<KeywordSequence> simulate_corpus(const CorpusIndex& corpus, const RankDistribution& dist,
                                             std::uint64_t seed, const DistractorOptions& distractors = {},
                                             std::size_t min_sets = 1);

/// Per-query metrics of one retrieval against its ground truth.
struct QueryOutcome {
  std::string sentence_id;
  std::size_t num_sets = 0;
  int recall = 0;
  double precision = 0.0;
  double bleu1 = 0.0;
  double bleu4 = 0.0;
  std::string top_id;
};

/// BLEU compares the top retrieved sentence with the ground truth over their
/// tokenized original text.
QueryOutcome judge(const CorpusIndex& corpus, const RelevanceIndex& relevance, const std::string& gt_id,
                   std::size_t num_sets, const std::vector<std::string>& ranked_ids, std::size_t n);

struct StratumMetrics {
  std::size_t min_sets = 0;
  std::size_t queries = 0;
  double recall = 0.0;
  double precision = 0.0;
  double bleu1 = 0.0;
  double bleu4 = 0.0;
};

/// Means over the queries with num_sets >= each stratum threshold.
std::vector<StratumMetrics> aggregate(std::span<const QueryOutcome> outcomes, std::span<const std::size_t> strata);

enum class Strategy { beam, greedy };

struct PipelineConfig {
  ClassifierProfile profile = ClassifierProfile::masked_contrastive();
  std::vector<ScorerKind> scorers = {ScorerKind::aho_corasick, ScorerKind::levenshtein, ScorerKind::tfidf};
  Strategy strategy = Strategy::beam;
  BeamOptions beam;
  std::size_t m_score = 5;
  CountMode count_mode = CountMode::multiplicity;
  std::uint64_t seed = 0;
  std::size_t n = 5;
  std::vector<std::size_t> strata = {5, 7};
  DistractorOptions distractors;
};

struct ScorerRun {
  ScorerKind scorer = ScorerKind::aho_corasick;
  std::vector<QueryOutcome> outcomes;
  std::vector<StratumMetrics> strata;
};

struct PipelineReport {
  std::size_t corpus_size = 0;
  std::size_t simulated = 0;
  std::vector<ScorerRun> runs;
};

/// simulate -> retrieve -> evaluate with every requested scorer on the same
/// simulated keyword sets. Only sentences in the smallest stratum are run.
PipelineReport run_pipeline(const CorpusIndex& corpus, const PipelineConfig& config);

/// Retrieve one simulated sequence with the configured strategy.
RetrievalResult retrieve(const Retriever& retriever, const KeywordSequence& sequence, Strategy strategy,
                         const BeamOptions& beam);

}  // namespace ksr
