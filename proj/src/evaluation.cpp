#include "ksr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_set>

namespace ksr {

double top_k_accuracy(std::span<const RankedPrediction> predictions, std::size_t k) {
  if (predictions.empty()) throw std::invalid_argument("top-k accuracy: no predictions");
  if (k < 1) throw std::invalid_argument("top-k accuracy: k must be at least 1");
  std::size_t hits = 0;
  for (const auto& p : predictions) {
    const auto end = p.candidates.begin() + static_cast<std::ptrdiff_t>(std::min(k, p.candidates.size()));
    if (std::find(p.candidates.begin(), end, p.ground_truth) != end) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

namespace {

std::size_t relevant_in_top(const RetrievalJudgment& j, std::size_t n) {
  const std::unordered_set<std::string_view> relevant(j.relevant.begin(), j.relevant.end());
  std::size_t found = 0;
  for (std::size_t i = 0; i < std::min(n, j.retrieved.size()); ++i) {
    if (relevant.count(j.retrieved[i])) ++found;
  }
  return found;
}

}  // namespace

int recall_at_n(const RetrievalJudgment& judgment, std::size_t n) {
  if (n < 1) throw std::invalid_argument("recall@n: n must be at least 1");
  return relevant_in_top(judgment, n) > 0 ? 1 : 0;
}

double precision_at_n(const RetrievalJudgment& judgment, std::size_t n) {
  if (n < 1) throw std::invalid_argument("precision@n: n must be at least 1");
  return static_cast<double>(relevant_in_top(judgment, n)) / static_cast<double>(n);
}

double mean_recall_at_n(std::span<const RetrievalJudgment> judgments, std::size_t n) {
  if (judgments.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& j : judgments) sum += recall_at_n(j, n);
  return sum / static_cast<double>(judgments.size());
}

double mean_precision_at_n(std::span<const RetrievalJudgment> judgments, std::size_t n) {
  if (judgments.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& j : judgments) sum += precision_at_n(j, n);
  return sum / static_cast<double>(judgments.size());
}

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t max_n,
            std::span<const double> weights) {
  if (max_n < 1 || max_n > 4) throw std::invalid_argument("bleu: max_n must be in 1..4");
  if (!weights.empty() && weights.size() != max_n) throw std::invalid_argument("bleu: need one weight per order");
  if (candidate.empty()) return 0.0;

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    if (candidate.size() < n) return 0.0;
    std::map<std::vector<std::string_view>, std::size_t> ref_counts;
    for (std::size_t i = 0; i + n <= reference.size(); ++i) {
      ++ref_counts[std::vector<std::string_view>(reference.begin() + i, reference.begin() + i + n)];
    }
    std::map<std::vector<std::string_view>, std::size_t> cand_counts;
    for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
      ++cand_counts[std::vector<std::string_view>(candidate.begin() + i, candidate.begin() + i + n)];
    }
    std::size_t clipped = 0;
    for (const auto& [gram, count] : cand_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) clipped += std::min(count, it->second);
    }
    if (clipped == 0) return 0.0;
    const double precision = static_cast<double>(clipped) / static_cast<double>(candidate.size() - n + 1);
    const double w = weights.empty() ? 1.0 / static_cast<double>(max_n) : weights[n - 1];
    log_sum += w * std::log(precision);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum);
}

RelevanceIndex::RelevanceIndex(const CorpusIndex& corpus) : corpus_(&corpus) {
  std::map<std::vector<std::string>, std::size_t> groups;
  group_of_.resize(corpus.size());
  for (SentenceIndex s = 0; s < corpus.size(); ++s) {
    const auto& lemmas = corpus.sentence(s).lemmas;
    auto [it, inserted] = groups.emplace(lemmas, groups_.size());
    if (inserted) groups_.emplace_back();
    groups_[it->second].push_back(corpus.sentence(s).id);
    group_of_[s] = it->second;
  }
}

std::vector<std::string> RelevanceIndex::relevant(std::string_view id) const {
  auto pos = corpus_->find(id);
  if (!pos) return {};
  return groups_[group_of_[*pos]];
}

}  // namespace ksr
