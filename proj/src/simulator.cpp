#include "ksr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "ksr/error.hpp"

namespace ksr {

void ClassifierProfile::validate() const {
  if (topk_accuracy.empty()) throw ConfigError("classifier profile: no accuracy anchors");
  if (k < 1) throw ConfigError("classifier profile: k must be at least 1");
  double prev = 0.0;
  for (auto [anchor, acc] : topk_accuracy) {
    if (anchor < 1) throw ConfigError("classifier profile: anchors must be >= 1");
    if (!(acc >= 0.0 && acc <= 1.0)) {
      throw ConfigError("classifier profile: accuracy at " + std::to_string(anchor) + " outside [0, 1]");
    }
    if (acc < prev) {
      throw ConfigError("classifier profile: accuracy decreases at top-" + std::to_string(anchor));
    }
    prev = acc;
  }
}

ClassifierProfile ClassifierProfile::masked_contrastive(std::size_t k) {
  return {{{1, 0.0866}, {5, 0.2490}, {10, 0.3640}, {15, 0.4628}, {20, 0.5515}}, 100, k};
}

ClassifierProfile ClassifierProfile::perfect(std::size_t k) { return {{{1, 1.0}}, 100, k}; }

ClassifierProfile ClassifierProfile::uniform(std::size_t vocabulary_size, std::size_t k) {
  ClassifierProfile p;
  p.vocabulary_size = vocabulary_size;
  p.k = k;
  for (std::size_t r = 1; r <= vocabulary_size; ++r) {
    p.topk_accuracy[r] = static_cast<double>(r) / static_cast<double>(vocabulary_size);
  }
  return p;
}

RankDistribution derive_rank_distribution(const ClassifierProfile& profile) {
  profile.validate();
  RankDistribution dist;
  dist.p_rank.assign(profile.k, 0.0);

  std::size_t prev_anchor = 0;
  double prev_acc = 0.0;
  std::size_t rank = 1;
  for (auto [anchor, acc] : profile.topk_accuracy) {
    const double per_rank = (acc - prev_acc) / static_cast<double>(anchor - prev_anchor);
    for (; rank <= anchor && rank <= profile.k; ++rank) dist.p_rank[rank - 1] = per_rank;
    prev_anchor = anchor;
    prev_acc = acc;
    if (rank > profile.k) break;
  }
  // A perfect or saturated curve ends early; ranks past the last anchor get
  // nothing only if the curve has already reached 1.
  if (rank <= profile.k && prev_acc < 1.0) {
    throw ConfigError("classifier profile: no accuracy anchor at or beyond k = " + std::to_string(profile.k));
  }
  double total = 0.0;
  for (double p : dist.p_rank) total += p;
  dist.p_miss = std::max(0.0, 1.0 - total);
  return dist;
}

DistractorMode parse_distractor_mode(std::string_view text) {
  if (text == "uniform") return DistractorMode::uniform;
  if (text == "frequency") return DistractorMode::frequency;
  if (text == "semantic") return DistractorMode::semantic;
  throw ConfigError("unknown distractor mode '" + std::string(text) + "'");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::size_t rank_of(const KeywordSet& set, std::string_view gt) {
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    if (set.candidates[i].word == gt) return i + 1;
  }
  return 0;
}

KeywordSet sample_keyword_set(const std::string& gt, const RankDistribution& dist, const Vocabulary& vocab,
                              std::mt19937_64& rng, const DistractorOptions& options) {
  const std::size_t k = dist.k();
  if (k < 1) throw ConfigError("keyword set size must be at least 1");
  if (vocab.size() < k) {
    throw ConfigError("vocabulary of " + std::to_string(vocab.size()) + " words is smaller than k = " +
                      std::to_string(k));
  }
  const auto gt_index = vocab.index_of(gt);
  if (!gt_index) throw std::invalid_argument("ground truth '" + gt + "' is not in the vocabulary");

  // Rank draw: 1..k, or 0 for a miss.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  std::size_t gt_rank = 0;
  double cdf = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    cdf += dist.p_rank[r];
    if (u < cdf) {
      gt_rank = r + 1;
      break;
    }
  }
  const std::size_t n_distractors = gt_rank == 0 ? k : k - 1;
  if (n_distractors > vocab.size() - 1) {
    throw ConfigError("vocabulary too small to fill " + std::to_string(n_distractors) + " distractors");
  }

  std::vector<std::size_t> picked;
  picked.reserve(n_distractors);
  std::unordered_set<std::size_t> used{*gt_index};
  const auto take = [&](std::size_t idx) {
    if (picked.size() < n_distractors && used.insert(idx).second) picked.push_back(idx);
  };

  if (options.mode == DistractorMode::semantic) {
    auto it = options.neighbours.find(gt);
    if (it != options.neighbours.end()) {
      std::vector<std::size_t> pool;
      for (const auto& w : it->second) {
        if (auto idx = vocab.index_of(w); idx && *idx != *gt_index) pool.push_back(*idx);
      }
      std::shuffle(pool.begin(), pool.end(), rng);
      for (std::size_t idx : pool) take(idx);
    }
  }
  if (options.mode == DistractorMode::frequency) {
    std::vector<double> weights;
    weights.reserve(vocab.size());
    for (const auto& e : vocab.entries()) weights.push_back(static_cast<double>(e.frequency));
    std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
    // Fall back to uniform if the weighted draw keeps colliding.
    for (std::size_t attempts = 0; picked.size() < n_distractors && attempts < 64 * k; ++attempts) {
      take(draw(rng));
    }
  }
  if (picked.size() < n_distractors) {
    if (2 * (n_distractors - picked.size()) <= vocab.size()) {
      std::uniform_int_distribution<std::size_t> draw(0, vocab.size() - 1);
      while (picked.size() < n_distractors) take(draw(rng));
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < vocab.size(); ++i) {
        if (!used.count(i)) rest.push_back(i);
      }
      std::shuffle(rest.begin(), rest.end(), rng);
      for (std::size_t idx : rest) take(idx);
    }
  }

  KeywordSet set;
  set.candidates.reserve(k);
  std::size_t next = 0;
  for (std::size_t slot = 1; slot <= k; ++slot) {
    const std::size_t idx = slot == gt_rank ? *gt_index : picked[next++];
    set.candidates.push_back({vocab.at(idx).lemma, 0.0});
  }
  // Softmax over scores -slot/2; strictly decreasing, sums to one.
  double z = 0.0;
  for (std::size_t i = 0; i < k; ++i) z += std::exp(-0.5 * static_cast<double>(i));
  for (std::size_t i = 0; i < k; ++i) set.candidates[i].probability = std::exp(-0.5 * static_cast<double>(i)) / z;
  return set;
}

KeywordSequence simulate_sentence(const ProcessedSentence& sentence, const RankDistribution& dist,
                                  const Vocabulary& vocab, std::mt19937_64& rng,
                                  const DistractorOptions& options) {
  KeywordSequence seq;
  seq.sentence_id = sentence.id;
  for (const auto& lemma : sentence.lemmas) {
    if (!vocab.contains(lemma)) continue;
    KeywordSet set = sample_keyword_set(lemma, dist, vocab, rng, options);
    set.position = seq.sets.size();
    seq.sets.push_back(std::move(set));
  }
  return seq;
}

}  // namespace ksr
