#include "ksr/retrieval.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "ksr/error.hpp"

namespace ksr {

void KeywordSet::validate() const {
  if (candidates.empty()) throw DataError("keyword set " + std::to_string(position) + ": no candidates");
  std::unordered_set<std::string_view> words;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.word.empty()) throw DataError("keyword set " + std::to_string(position) + ": empty word");
    if (!(c.probability > 0.0 && c.probability <= 1.0)) {
      throw DataError("keyword set " + std::to_string(position) + ": probability of '" + c.word +
                      "' outside (0, 1]");
    }
    if (i > 0 && c.probability > candidates[i - 1].probability) {
      throw DataError("keyword set " + std::to_string(position) + ": probabilities not descending");
    }
    if (!words.insert(c.word).second) {
      throw DataError("keyword set " + std::to_string(position) + ": duplicate word '" + c.word + "'");
    }
  }
}

void KeywordSequence::validate() const {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].position != i) {
      throw DataError("keyword sequence '" + sentence_id + "': set positions must be 0..L-1");
    }
    sets[i].validate();
  }
}

Beam Beam::initial(std::size_t capacity) {
  Beam beam;
  beam.capacity = capacity;
  beam.queries.push_back({});
  return beam;
}

std::vector<CombinationQuery> expand(const Beam& beam, const KeywordSet& set, std::size_t set_index,
                                     std::size_t k_used) {
  const std::size_t k = std::min(k_used, set.candidates.size());
  std::vector<CombinationQuery> out;
  out.reserve(beam.queries.size() * k);
  for (const auto& parent : beam.queries) {
    for (std::size_t r = 0; r < k; ++r) {
      CombinationQuery q = parent.query;
      q.keywords.push_back(set.candidates[r].word);
      q.provenance.push_back({set_index, r});
      out.push_back(std::move(q));
    }
  }
  return out;
}

bool beam_order(const ScoredQuery& a, const ScoredQuery& b, const Scorer& scorer) {
  if (a.score.value != b.score.value) return scorer.better(a.score.value, b.score.value);
  return a.query.keywords < b.query.keywords;
}

Beam prune(std::vector<ScoredQuery> scored, const Scorer& scorer, std::size_t m) {
  if (m < 1) throw ConfigError("beam width must be at least 1");
  const auto order = [&scorer](const ScoredQuery& a, const ScoredQuery& b) { return beam_order(a, b, scorer); };
  if (scored.size() > m) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(m), scored.end(), order);
    scored.resize(m);
  } else {
    std::sort(scored.begin(), scored.end(), order);
  }
  Beam beam;
  beam.capacity = m;
  beam.queries = std::move(scored);
  return beam;
}

Beam prune(const std::vector<CombinationQuery>& candidates, const Scorer& scorer, std::size_t m) {
  std::vector<ScoredQuery> scored;
  scored.reserve(candidates.size());
  for (const auto& q : candidates) scored.push_back({q, scorer.score(q)});
  return prune(std::move(scored), scorer, m);
}

Beam Retriever::run_beam(const KeywordSequence& sequence, const BeamOptions& options) const {
  Beam beam = Beam::initial(options.beam_width);
  for (std::size_t l = 0; l < sequence.sets.size(); ++l) {
    beam = prune(expand(beam, sequence.sets[l], l, options.k_used), *scorer_, options.beam_width);
  }
  return beam;
}

namespace {

// Dense per-sentence counts behind one retained query.
struct CountedQuery {
  ScoredQuery scored;
  std::vector<std::uint32_t> counts;
};

struct ChildRef {
  std::size_t parent;
  std::size_t rank;
  std::optional<TermId> term;  // nullopt when the keyword leaves counts unchanged
};

}  // namespace

// Child top-m lists come from the parent's top-m plus the new keyword's
// postings: a sentence outside both cannot overtake the parent's top-m, since
// counts only grow and the (count, id) order among untouched sentences is
// unchanged.
Beam Retriever::run_beam_incremental(const KeywordSequence& sequence, const BeamOptions& options) const {
  const CorpusIndex& corpus = scorer_->corpus();
  const std::size_t n = corpus.size();
  const std::size_t m_score = scorer_->options().m_score;
  const std::size_t top = std::min(m_score, n);
  const bool distinct = scorer_->options().count_mode == CountMode::distinct;
  const auto rank_order = [](const SentenceScore& a, const SentenceScore& b) {
    return a.score != b.score ? a.score > b.score : a.sentence < b.sentence;
  };

  std::vector<CountedQuery> beam(1);
  beam[0].counts.assign(n, 0);
  std::vector<std::uint32_t> mark(n, 0);
  std::uint32_t generation = 0;
  std::vector<SentenceScore> pool;

  for (std::size_t l = 0; l < sequence.sets.size(); ++l) {
    const KeywordSet& set = sequence.sets[l];
    const std::size_t k = std::min(options.k_used, set.candidates.size());

    std::vector<ScoredQuery> children;
    std::vector<ChildRef> refs;
    children.reserve(beam.size() * k);
    refs.reserve(beam.size() * k);
    for (std::size_t pi = 0; pi < beam.size(); ++pi) {
      const CountedQuery& parent = beam[pi];
      for (std::size_t r = 0; r < k; ++r) {
        const std::string& word = set.candidates[r].word;
        ScoredQuery child;
        child.query = parent.scored.query;
        child.query.keywords.push_back(word);
        child.query.provenance.push_back({l, r});

        std::optional<TermId> term = corpus.term_id(word);
        if (term && distinct) {
          const auto& kws = parent.scored.query.keywords;
          if (std::find(kws.begin(), kws.end(), word) != kws.end()) term.reset();
        }
        if (!term) {
          child.score = parent.scored.score;
        } else {
          ++generation;
          pool.clear();
          for (const Posting& p : corpus.postings(*term)) {
            mark[p.sentence] = generation;
            const std::uint32_t inc = distinct ? 1u : p.tf;
            pool.push_back({p.sentence, static_cast<double>(parent.counts[p.sentence] + inc)});
          }
          for (const auto& e : parent.scored.score.per_sentence) {
            if (mark[e.sentence] != generation) pool.push_back(e);
          }
          const std::size_t keep = std::min(top, pool.size());
          std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), rank_order);
          child.score = summarize({pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep)}, m_score, n);
        }
        children.push_back(std::move(child));
        refs.push_back({pi, r, term});
      }
    }

    std::vector<std::size_t> order(children.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto cmp = [&](std::size_t a, std::size_t b) { return beam_order(children[a], children[b], *scorer_); };
    const std::size_t keep = std::min(options.beam_width, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(), cmp);

    std::vector<CountedQuery> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      const ChildRef& ref = refs[order[i]];
      CountedQuery entry{std::move(children[order[i]]), beam[ref.parent].counts};
      if (ref.term) {
        for (const Posting& p : corpus.postings(*ref.term)) entry.counts[p.sentence] += distinct ? 1u : p.tf;
      }
      next.push_back(std::move(entry));
    }
    beam = std::move(next);
  }

  Beam result;
  result.capacity = options.beam_width;
  for (auto& entry : beam) result.queries.push_back(std::move(entry.scored));
  return result;
}

namespace {

// Last dynamic-programming row of every sentence, laid out back to back.
struct RowQuery {
  ScoredQuery scored;
  std::vector<std::uint32_t> rows;
};

}  // namespace

// Appending a keyword adds one row to each sentence's edit-distance table, so
// a child reuses its parent's last rows instead of recomputing the table.
Beam Retriever::run_beam_levenshtein(const KeywordSequence& sequence, const BeamOptions& options) const {
  const CorpusIndex& corpus = scorer_->corpus();
  const std::size_t n = corpus.size();
  const std::size_t m_score = scorer_->options().m_score;
  const std::size_t top = std::min(m_score, n);
  const auto rank_order = [](const SentenceScore& a, const SentenceScore& b) {
    return a.score != b.score ? a.score < b.score : a.sentence < b.sentence;
  };

  std::vector<std::size_t> offsets(n + 1, 0);
  for (SentenceIndex s = 0; s < n; ++s) offsets[s + 1] = offsets[s] + corpus.sentence_terms(s).size() + 1;

  std::vector<RowQuery> beam(1);
  beam[0].rows.resize(offsets[n]);
  for (SentenceIndex s = 0; s < n; ++s) {
    for (std::size_t j = 0; j + offsets[s] < offsets[s + 1]; ++j) beam[0].rows[offsets[s] + j] = static_cast<std::uint32_t>(j);
  }

  std::vector<SentenceScore> all(n);
  for (std::size_t l = 0; l < sequence.sets.size(); ++l) {
    const KeywordSet& set = sequence.sets[l];
    const std::size_t k = std::min(options.k_used, set.candidates.size());
    const auto depth = static_cast<std::uint32_t>(l + 1);

    std::vector<RowQuery> children;
    children.reserve(beam.size() * k);
    for (const RowQuery& parent : beam) {
      for (std::size_t r = 0; r < k; ++r) {
        const std::string& word = set.candidates[r].word;
        const TermId y = corpus.term_id(word).value_or(std::numeric_limits<TermId>::max());
        RowQuery child;
        child.scored.query = parent.scored.query;
        child.scored.query.keywords.push_back(word);
        child.scored.query.provenance.push_back({l, r});
        child.rows.resize(offsets[n]);
        for (SentenceIndex s = 0; s < n; ++s) {
          const auto terms = corpus.sentence_terms(s);
          const std::uint32_t* prev = parent.rows.data() + offsets[s];
          std::uint32_t* cur = child.rows.data() + offsets[s];
          cur[0] = depth;
          for (std::size_t j = 1; j <= terms.size(); ++j) {
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (terms[j - 1] == y ? 0u : 1u)});
          }
          all[s] = {s, static_cast<double>(cur[terms.size()])};
        }
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top), all.end(), rank_order);
        child.scored.score = summarize({all.begin(), all.begin() + static_cast<std::ptrdiff_t>(top)}, m_score, n);
        children.push_back(std::move(child));
      }
    }

    const std::size_t keep = std::min(options.beam_width, children.size());
    std::vector<std::size_t> order(children.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) { return beam_order(children[a].scored, children[b].scored, *scorer_); });
    std::vector<RowQuery> next;
    next.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) next.push_back(std::move(children[order[i]]));
    beam = std::move(next);
  }

  Beam result;
  result.capacity = options.beam_width;
  for (auto& entry : beam) result.queries.push_back(std::move(entry.scored));
  return result;
}

std::vector<SentenceScore> Retriever::assemble_ranking(const std::vector<ScoredQuery>& final_queries,
                                                       std::size_t max_results) const {
  const std::size_t n = scorer_->corpus().size();
  if (n == 0 || final_queries.empty()) return {};
  const std::size_t wanted = std::min({kMinResults, n, max_results});

  std::vector<SentenceScore> ranked = scorer_->hits(final_queries.front().query);
  if (ranked.size() > max_results) ranked.resize(max_results);
  std::vector<bool> seen(n, false);
  for (const auto& r : ranked) seen[r.sentence] = true;

  const auto append_from = [&](const std::vector<SentenceScore>& list) {
    for (const auto& h : list) {
      if (ranked.size() >= wanted) return;
      if (!seen[h.sentence]) {
        seen[h.sentence] = true;
        ranked.push_back(h);
      }
    }
  };
  for (std::size_t i = 1; i < final_queries.size() && ranked.size() < wanted; ++i) {
    append_from(scorer_->hits(final_queries[i].query));
  }
  if (ranked.size() < wanted) append_from(scorer_->rank(final_queries.front().query));
  return ranked;
}

RetrievalResult Retriever::beam_search(const KeywordSequence& sequence, const BeamOptions& options) const {
  if (sequence.sets.empty()) {
    throw DataError("keyword sequence '" + sequence.sentence_id + "' has no keyword sets");
  }
  if (options.beam_width < 1) throw ConfigError("beam width must be at least 1");
  if (options.k_used < 1) throw ConfigError("k_used must be at least 1");
  if (options.max_results < 1) throw ConfigError("max_results must be at least 1");

  RetrievalResult result;
  result.sentence_id = sequence.sentence_id;
  std::size_t k = 0;
  for (const auto& s : sequence.sets) k = std::max(k, std::min(options.k_used, s.candidates.size()));
  result.metadata = {sequence.sets.size(), k, options.beam_width, scorer_->options().kind, "bsr"};
  if (scorer_->corpus().empty()) return result;

  Beam beam;
  if (options.incremental && scorer_->options().kind == ScorerKind::aho_corasick) {
    beam = run_beam_incremental(sequence, options);
  } else if (options.incremental && scorer_->options().kind == ScorerKind::levenshtein) {
    beam = run_beam_levenshtein(sequence, options);
  } else {
    beam = run_beam(sequence, options);
  }
  result.best_queries = std::move(beam.queries);
  result.ranked = assemble_ranking(result.best_queries, options.max_results);
  return result;
}

RetrievalResult Retriever::greedy(const KeywordSequence& sequence, std::size_t max_results) const {
  if (sequence.sets.empty()) {
    throw DataError("keyword sequence '" + sequence.sentence_id + "' has no keyword sets");
  }
  if (max_results < 1) throw ConfigError("max_results must be at least 1");
  RetrievalResult result;
  result.sentence_id = sequence.sentence_id;
  result.metadata = {sequence.sets.size(), 1, 1, scorer_->options().kind, "greedy"};
  if (scorer_->corpus().empty()) return result;

  CombinationQuery query;
  for (std::size_t l = 0; l < sequence.sets.size(); ++l) {
    if (sequence.sets[l].candidates.empty()) throw DataError("keyword set without candidates");
    query.keywords.push_back(sequence.sets[l].candidates.front().word);
    query.provenance.push_back({l, 0});
  }
  QueryScore score = scorer_->score(query);
  result.best_queries.push_back({std::move(query), std::move(score)});
  result.ranked = assemble_ranking(result.best_queries, max_results);
  return result;
}

}  // namespace ksr
