#include "ksr/synthetic.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <random>
#include <unordered_set>

namespace ksr::synthetic {
namespace {

constexpr std::array<std::string_view, 16> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n",
                                                      "p", "r", "s", "t", "v", "z", "sh", "tr"};
constexpr std::array<std::string_view, 5> kVowels = {"a", "e", "i", "o", "u"};

constexpr std::array<std::string_view, 18> kFunctionWords = {
    "the", "a", "of", "to", "in", "and", "is", "was", "for", "that", "with", "as", "by", "on", "he", "it", "his",
    "an"};

}  // namespace

std::string pseudo_word(std::size_t index) {
  // Bijective base-80 numeral over CV syllables, at least two syllables.
  constexpr std::size_t base = kOnsets.size() * kVowels.size();
  std::string word;
  std::size_t v = index + base;
  do {
    const std::size_t syl = v % base;
    word.insert(0, std::string(kOnsets[syl / kVowels.size()]) + std::string(kVowels[syl % kVowels.size()]));
    v /= base;
  } while (v > 0);
  return word;
}

Corpus generate_corpus(const CorpusOptions& options) {
  Corpus corpus;
  std::mt19937_64 rng(options.seed);

  corpus.lexicon.reserve(options.lexicon_size);
  std::unordered_map<std::string, std::string> inflections;
  for (std::size_t i = 0; i < options.lexicon_size; ++i) {
    corpus.lexicon.push_back(pseudo_word(i));
    inflections.emplace(corpus.lexicon.back() + "s", corpus.lexicon.back());
    inflections.emplace(corpus.lexicon.back() + "ed", corpus.lexicon.back());
  }
  corpus.lemmas = LemmaDictionary(std::move(inflections));

  std::vector<double> weights(options.lexicon_size);
  for (std::size_t r = 0; r < weights.size(); ++r) {
    weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), options.zipf_exponent);
  }
  std::discrete_distribution<std::size_t> content(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> length(options.min_tokens, options.max_tokens);
  std::uniform_int_distribution<std::size_t> function(0, kFunctionWords.size() - 1);
  std::bernoulli_distribution is_function(options.function_word_rate);
  std::bernoulli_distribution inflect(options.inflection_rate);
  std::bernoulli_distribution plural(0.5);

  std::unordered_set<std::string> seen;
  char id[32];
  while (corpus.sentences.size() < options.sentences) {
    std::string text;
    const std::size_t n = length(rng);
    for (std::size_t t = 0; t < n; ++t) {
      std::string token;
      if (is_function(rng)) {
        token = kFunctionWords[function(rng)];
      } else {
        token = corpus.lexicon[content(rng)];
        if (inflect(rng)) token += plural(rng) ? "s" : "ed";
      }
      if (t == 0) {
        token[0] = static_cast<char>(token[0] - 'a' + 'A');
      } else {
        text += (t % 7 == 6) ? ", " : " ";
      }
      text += token;
    }
    text += '.';
    if (!seen.insert(text).second) continue;
    std::snprintf(id, sizeof id, "s%06zu", corpus.sentences.size() + 1);
    corpus.sentences.push_back({id, std::move(text)});
  }
  return corpus;
}

}  // namespace ksr::synthetic
