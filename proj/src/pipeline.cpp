#include "ksr/pipeline.hpp"

#include <algorithm>

#include "ksr/error.hpp"

namespace ksr {

CorpusIndex index_corpus(const std::vector<RawSentence>& raw, const LemmaDictionary& dict, const StopwordList& stop,
                         std::size_t vocabulary_size, std::vector<std::string>* warnings) {
  std::vector<ProcessedSentence> processed;
  processed.reserve(raw.size());
  for (const auto& s : raw) {
    processed.push_back(preprocess(s, dict, stop));
    if (processed.back().lemmas.empty() && warnings) {
      warnings->push_back("sentence '" + s.id + "' has no content words after preprocessing");
    }
  }
  Vocabulary vocab = build_vocabulary(processed, vocabulary_size, warnings);
  return CorpusIndex::build(std::move(processed), std::move(vocab));
}

std::vector<KeywordSequence> simulate_corpus(const CorpusIndex& corpus, const RankDistribution& dist,
                                             std::uint64_t seed, const DistractorOptions& distractors,
                                             std::size_t min_sets) {
  std::vector<KeywordSequence> out;
  for (SentenceIndex s = 0; s < corpus.size(); ++s) {
    std::mt19937_64 rng(derive_seed(seed, s));
    auto seq = simulate_sentence(corpus.sentence(s), dist, corpus.vocabulary(), rng, distractors);
    if (seq.sets.size() >= std::max<std::size_t>(min_sets, 1)) out.push_back(std::move(seq));
  }
  return out;
}

QueryOutcome judge(const CorpusIndex& corpus, const RelevanceIndex& relevance, const std::string& gt_id,
                   std::size_t num_sets, const std::vector<std::string>& ranked_ids, std::size_t n) {
  const auto gt = corpus.find(gt_id);
  if (!gt) throw DataError("ground truth sentence '" + gt_id + "' is not in the corpus");
  QueryOutcome out;
  out.sentence_id = gt_id;
  out.num_sets = num_sets;
  const RetrievalJudgment j{ranked_ids, relevance.relevant(gt_id)};
  out.recall = recall_at_n(j, n);
  out.precision = precision_at_n(j, n);
  if (!ranked_ids.empty()) {
    out.top_id = ranked_ids.front();
    const auto top = corpus.find(out.top_id);
    if (!top) throw DataError("retrieved sentence '" + out.top_id + "' is not in the corpus");
    const auto reference = tokenize(corpus.sentence(*gt).original_text);
    const auto candidate = tokenize(corpus.sentence(*top).original_text);
    out.bleu1 = bleu(candidate, reference, 1);
    out.bleu4 = bleu(candidate, reference, 4);
  }
  return out;
}

std::vector<StratumMetrics> aggregate(std::span<const QueryOutcome> outcomes, std::span<const std::size_t> strata) {
  std::vector<StratumMetrics> out;
  for (std::size_t threshold : strata) {
    StratumMetrics m;
    m.min_sets = threshold;
    for (const auto& o : outcomes) {
      if (o.num_sets < threshold) continue;
      ++m.queries;
      m.recall += o.recall;
      m.precision += o.precision;
      m.bleu1 += o.bleu1;
      m.bleu4 += o.bleu4;
    }
    if (m.queries > 0) {
      const auto q = static_cast<double>(m.queries);
      m.recall /= q;
      m.precision /= q;
      m.bleu1 /= q;
      m.bleu4 /= q;
    }
    out.push_back(m);
  }
  return out;
}

RetrievalResult retrieve(const Retriever& retriever, const KeywordSequence& sequence, Strategy strategy,
                         const BeamOptions& beam) {
  return strategy == Strategy::greedy ? retriever.greedy(sequence, beam.max_results)
                                      : retriever.beam_search(sequence, beam);
}

PipelineReport run_pipeline(const CorpusIndex& corpus, const PipelineConfig& config) {
  if (config.scorers.empty()) throw ConfigError("pipeline: no scorers requested");
  if (config.n < 1) throw ConfigError("pipeline: n must be at least 1");
  const RankDistribution dist = derive_rank_distribution(config.profile);
  const std::size_t min_sets =
      config.strata.empty() ? 1 : *std::min_element(config.strata.begin(), config.strata.end());
  const auto sequences = simulate_corpus(corpus, dist, config.seed, config.distractors, min_sets);
  const RelevanceIndex relevance(corpus);

  PipelineReport report;
  report.corpus_size = corpus.size();
  report.simulated = sequences.size();
  for (ScorerKind kind : config.scorers) {
    const Scorer scorer(corpus, {kind, config.m_score, config.count_mode});
    const Retriever retriever(scorer);
    ScorerRun run;
    run.scorer = kind;
    for (const auto& seq : sequences) {
      const auto result = retrieve(retriever, seq, config.strategy, config.beam);
      std::vector<std::string> ids;
      ids.reserve(result.ranked.size());
      for (const auto& r : result.ranked) ids.push_back(corpus.sentence(r.sentence).id);
      run.outcomes.push_back(judge(corpus, relevance, seq.sentence_id, seq.sets.size(), ids, config.n));
    }
    run.strata = aggregate(run.outcomes, config.strata);
    report.runs.push_back(std::move(run));
  }
  return report;
}

}  // namespace ksr
