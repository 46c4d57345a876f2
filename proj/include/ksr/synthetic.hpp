#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ksr/text_corpus.hpp"

namespace ksr::synthetic {

/// Deterministic pronounceable pseudo-word for `index`; distinct indices give
/// distinct words, and every word ends in a vowel.
std::string pseudo_word(std::size_t index);

struct CorpusOptions {
  std::size_t sentences = 1000;
  std::size_t lexicon_size = 2000;
  double zipf_exponent = 1.0;
  std::size_t min_tokens = 8;
  std::size_t max_tokens = 30;
  double function_word_rate = 0.45;
  /// Share of content tokens written in an inflected form ("-s", "-ed")
  /// that the generated lemma dictionary maps back to the base word.
  double inflection_rate = 0.2;
  std::uint64_t seed = 1;
};

struct Corpus {
  std::vector<RawSentence> sentences;
  LemmaDictionary lemmas;
  std::vector<std::string> lexicon;  // content words, most frequent first
};

/// English-like text: Zipf-distributed content words interleaved with
/// function words, ids "s000001", ... in generation order. Sentences whose
/// text repeats an earlier one are regenerated, so the corpus is duplicate
/// free.
Corpus generate_corpus(const CorpusOptions& options);

}  // namespace ksr::synthetic
