#include "ksr/scoring.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "ksr/aho_corasick.hpp"
#include "ksr/error.hpp"

namespace ksr {

std::string_view to_string(CountMode mode) {
  return mode == CountMode::multiplicity ? "multiplicity" : "distinct";
}

std::string_view to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::aho_corasick:
      return "ac";
    case ScorerKind::levenshtein:
      return "ld";
    case ScorerKind::tfidf:
      return "tfidf";
  }
  return "?";
}

CountMode parse_count_mode(std::string_view text) {
  if (text == "multiplicity") return CountMode::multiplicity;
  if (text == "distinct") return CountMode::distinct;
  throw ConfigError("unknown count mode '" + std::string(text) + "'");
}

ScorerKind parse_scorer(std::string_view text) {
  if (text == "ac" || text == "aho-corasick") return ScorerKind::aho_corasick;
  if (text == "ld" || text == "levenshtein") return ScorerKind::levenshtein;
  if (text == "tfidf" || text == "tf-idf") return ScorerKind::tfidf;
  throw ConfigError("unknown scorer '" + std::string(text) + "'");
}

std::size_t levenshtein_score(const CombinationQuery& query, const ProcessedSentence& sentence) {
  return levenshtein_distance<std::string>(query.keywords, sentence.lemmas);
}

TfidfModel::TfidfModel(const CorpusIndex& corpus) : corpus_(&corpus) {
  const auto n = static_cast<double>(corpus.size());
  idf_.resize(corpus.term_count());
  for (TermId t = 0; t < corpus.term_count(); ++t) {
    idf_[t] = std::log(n / static_cast<double>(corpus.postings(t).size()));
  }
  norms_.assign(corpus.size(), 0.0);
  for (TermId t = 0; t < corpus.term_count(); ++t) {
    for (const auto& p : corpus.postings(t)) {
      const double w = p.tf * idf_[t];
      norms_[p.sentence] += w * w;
    }
  }
  for (double& v : norms_) v = std::sqrt(v);
}

TfidfModel::QueryVector TfidfModel::query_vector(const CombinationQuery& query) const {
  std::unordered_map<TermId, double> tf;
  for (const auto& kw : query.keywords) {
    if (auto t = corpus_->term_id(kw)) tf[*t] += 1.0;
  }
  QueryVector q;
  for (auto [t, count] : tf) {
    const double w = count * idf_[t];
    if (w != 0.0) q.weights.emplace_back(t, w);
    q.norm += w * w;
  }
  std::sort(q.weights.begin(), q.weights.end());
  q.norm = std::sqrt(q.norm);
  return q;
}

double TfidfModel::score(const CombinationQuery& query, SentenceIndex sentence) const {
  const auto q = query_vector(query);
  const double snorm = norms_.at(sentence);
  if (q.norm == 0.0 || snorm == 0.0) return 0.0;
  std::unordered_map<TermId, std::uint32_t> tf;
  for (TermId t : corpus_->sentence_terms(sentence)) ++tf[t];
  double dot = 0.0;
  for (auto [t, w] : q.weights) {
    auto it = tf.find(t);
    if (it != tf.end()) dot += w * it->second * idf_[t];
  }
  return std::clamp(dot / (q.norm * snorm), 0.0, 1.0);
}

std::vector<SentenceScore> TfidfModel::score_all(const CombinationQuery& query) const {
  const auto q = query_vector(query);
  if (q.norm == 0.0) return {};
  std::vector<double> dot(corpus_->size(), 0.0);
  std::vector<SentenceIndex> touched;
  for (auto [t, w] : q.weights) {
    for (const auto& p : corpus_->postings(t)) {
      if (dot[p.sentence] == 0.0) touched.push_back(p.sentence);
      dot[p.sentence] += w * p.tf * idf_[t];
    }
  }
  std::sort(touched.begin(), touched.end());
  std::vector<SentenceScore> out;
  out.reserve(touched.size());
  for (SentenceIndex s : touched) {
    const double cos = std::clamp(dot[s] / (q.norm * norms_[s]), 0.0, 1.0);
    if (cos > 0.0) out.push_back({s, cos});
  }
  return out;
}

double tfidf_score(const CombinationQuery& query, SentenceIndex sentence, const TfidfModel& model) {
  return model.score(query, sentence);
}

std::vector<SentenceScore> occurrence_counts(const CombinationQuery& query, const CorpusIndex& corpus,
                                             CountMode mode, Pruning pruning) {
  if (query.keywords.empty()) throw std::invalid_argument("occurrence score: empty query");
  const AhoCorasick automaton(query.keywords);

  // Distinct mode counts each keyword string once: map duplicate patterns onto
  // their first occurrence.
  std::vector<std::uint32_t> canonical(query.keywords.size());
  {
    std::unordered_map<std::string_view, std::uint32_t> first;
    for (std::uint32_t p = 0; p < query.keywords.size(); ++p) {
      canonical[p] = first.emplace(query.keywords[p], p).first->second;
    }
  }

  std::vector<SentenceIndex> candidates;
  if (pruning == Pruning::full_scan) {
    candidates.resize(corpus.size());
    std::iota(candidates.begin(), candidates.end(), SentenceIndex{0});
  } else {
    std::unordered_set<TermId> seen;
    for (const auto& kw : query.keywords) {
      auto t = corpus.term_id(kw);
      if (!t || !seen.insert(*t).second) continue;
      for (const auto& p : corpus.postings(*t)) candidates.push_back(p.sentence);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  }

  std::vector<SentenceScore> out;
  std::vector<std::uint32_t> counts(query.keywords.size());
  for (SentenceIndex s : candidates) {
    std::fill(counts.begin(), counts.end(), 0u);
    automaton.add_token_counts(corpus.sentence(s).lemmas, counts);
    std::uint32_t total = 0;
    for (std::size_t p = 0; p < counts.size(); ++p) {
      if (mode == CountMode::multiplicity) {
        total += counts[p];
      } else if (canonical[p] == p && counts[p] > 0) {
        ++total;
      }
    }
    if (total > 0) out.push_back({s, static_cast<double>(total)});
  }
  return out;
}

QueryScore summarize(std::vector<SentenceScore> ranked_hits, std::size_t m_score, std::size_t corpus_size) {
  QueryScore result;
  const std::size_t denom = std::min(m_score, corpus_size);
  if (denom == 0) return result;
  if (ranked_hits.size() > denom) ranked_hits.resize(denom);
  double sum = 0.0;
  for (const auto& h : ranked_hits) sum += h.score;
  result.value = sum / static_cast<double>(denom);
  result.per_sentence = std::move(ranked_hits);
  return result;
}

QueryScore ac_score(const CombinationQuery& query, const CorpusIndex& corpus, std::size_t m_score,
                    CountMode mode, Pruning pruning) {
  if (m_score < 1) throw std::invalid_argument("m_score must be at least 1");
  auto hits = occurrence_counts(query, corpus, mode, pruning);
  std::sort(hits.begin(), hits.end(), [](const SentenceScore& a, const SentenceScore& b) {
    return a.score != b.score ? a.score > b.score : a.sentence < b.sentence;
  });
  return summarize(std::move(hits), m_score, corpus.size());
}

Scorer::Scorer(const CorpusIndex& corpus, ScorerOptions options) : corpus_(&corpus), options_(options) {
  if (options_.m_score < 1) throw ConfigError("m_score must be at least 1");
  if (options_.kind == ScorerKind::tfidf) tfidf_ = std::make_unique<TfidfModel>(corpus);
}

void Scorer::sort_ranked(std::vector<SentenceScore>& scores) const {
  std::sort(scores.begin(), scores.end(), [this](const SentenceScore& a, const SentenceScore& b) {
    return a.score != b.score ? better(a.score, b.score) : a.sentence < b.sentence;
  });
}

std::vector<SentenceScore> Scorer::sparse_scores(const CombinationQuery& query) const {
  if (query.keywords.empty()) throw std::invalid_argument("scorer: empty query");
  switch (options_.kind) {
    case ScorerKind::aho_corasick:
      return occurrence_counts(query, *corpus_, options_.count_mode);
    case ScorerKind::tfidf:
      return tfidf_->score_all(query);
    case ScorerKind::levenshtein: {
      // Intern the query against corpus terms; unknown keywords get ids past
      // the term range so they never equal a sentence token.
      std::vector<TermId> q;
      std::unordered_map<std::string_view, TermId> unknown;
      for (const auto& kw : query.keywords) {
        if (auto t = corpus_->term_id(kw)) {
          q.push_back(*t);
        } else {
          auto id = static_cast<TermId>(corpus_->term_count() + unknown.size());
          q.push_back(unknown.emplace(kw, id).first->second);
        }
      }
      std::vector<SentenceScore> out(corpus_->size());
      for (SentenceIndex s = 0; s < corpus_->size(); ++s) {
        out[s] = {s, static_cast<double>(levenshtein_distance<TermId>(q, corpus_->sentence_terms(s)))};
      }
      return out;
    }
  }
  throw InvariantError("unreachable scorer kind");
}

std::vector<SentenceScore> Scorer::hits(const CombinationQuery& query) const {
  auto scores = sparse_scores(query);
  sort_ranked(scores);
  return scores;
}

QueryScore Scorer::score(const CombinationQuery& query) const {
  return summarize(hits(query), options_.m_score, corpus_->size());
}

std::vector<SentenceScore> Scorer::rank(const CombinationQuery& query) const {
  auto ranked = hits(query);
  if (ranked.size() < corpus_->size()) {
    std::vector<bool> listed(corpus_->size(), false);
    for (const auto& r : ranked) listed[r.sentence] = true;
    for (SentenceIndex s = 0; s < corpus_->size(); ++s) {
      if (!listed[s]) ranked.push_back({s, 0.0});
    }
  }
  return ranked;
}

std::vector<SentenceScore> rank_sentences(const CombinationQuery& query, const CorpusIndex& corpus,
                                          ScorerOptions options) {
  return Scorer(corpus, options).rank(query);
}

}  // namespace ksr
