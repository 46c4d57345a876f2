#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ksr {

struct RawSentence {
  std::string id;
  std::string text;
};

/// Surface form -> lemma lookup with identity fallback.
///
/// Every lemma must be a fixed point of the mapping; the constructor rejects
/// chains such as `worked -> work, work -> labor`.
class LemmaDictionary {
 public:
  LemmaDictionary() = default;
  explicit LemmaDictionary(std::unordered_map<std::string, std::string> entries);

  /// Reads `surface<TAB>lemma` lines. Blank lines and lines starting with '#'
  /// are skipped. Keys and values are lowercased.
  static LemmaDictionary load_tsv(std::istream& in);

  std::string lemmatize(std::string_view token) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(const std::vector<std::string>& words);

  /// English function words. A handful of frequent words ("during", "her",
  /// "other", "not", "then", "may") are deliberately kept as content words.
  static StopwordList english_default();
  /// One token per line; blank lines and '#' comments skipped.
  static StopwordList load(std::istream& in);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct ProcessedSentence {
  std::string id;
  std::vector<std::string> lemmas;
  std::string original_text;

  bool operator==(const ProcessedSentence&) const = default;
};

/// Maximal runs of alphanumeric characters, ASCII-lowercased. Non-ASCII code
/// points count as word characters except for the Latin-1 punctuation block,
/// general punctuation (U+2000..U+206F) and CJK punctuation (U+3000..U+303F).
std::vector<std::string> tokenize(std::string_view text);

/// Tokenize, lemmatize, then drop lemmas found in the stopword list.
ProcessedSentence preprocess(const RawSentence& sentence, const LemmaDictionary& dict,
                             const StopwordList& stop);

class Vocabulary {
 public:
  struct Entry {
    std::string lemma;
    std::uint64_t frequency = 0;

    bool operator==(const Entry&) const = default;
  };

  Vocabulary() = default;
  /// Entries must already be in rank order; index i is entries[i].
  explicit Vocabulary(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }
  bool contains(std::string_view lemma) const { return index_of(lemma).has_value(); }
  std::optional<std::size_t> index_of(std::string_view lemma) const;
  const Entry& at(std::size_t index) const { return entries_.at(index); }
  const std::vector<Entry>& entries() const { return entries_; }

  bool operator==(const Vocabulary& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

/// Keeps the `top_v` most frequent lemmas (descending frequency, ties broken
/// lexicographically). When the corpus has fewer distinct lemmas, all of them
/// are kept and a warning is appended to `warnings` if given.
Vocabulary build_vocabulary(std::span<const ProcessedSentence> sentences, std::size_t top_v,
                            std::vector<std::string>* warnings = nullptr);

using SentenceIndex = std::uint32_t;
using TermId = std::uint32_t;

struct Posting {
  SentenceIndex sentence;
  std::uint32_t tf;
};

/// Immutable searchable corpus.
///
/// Sentences are stored in ascending id order, so ascending SentenceIndex is
/// ascending sentence id. Every lemma is interned as a TermId; postings per
/// term are sorted by sentence.
class CorpusIndex {
 public:
  CorpusIndex() = default;

  /// Throws DataError naming the offending id on duplicates.
  static CorpusIndex build(std::vector<ProcessedSentence> sentences, Vocabulary vocabulary);

  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }
  const ProcessedSentence& sentence(SentenceIndex index) const { return sentences_.at(index); }
  const std::vector<ProcessedSentence>& sentences() const { return sentences_; }
  std::optional<SentenceIndex> find(std::string_view id) const;
  const Vocabulary& vocabulary() const { return vocabulary_; }

  /// Sentence ids containing `lemma`, ascending. Empty for unknown lemmas.
  std::vector<std::string> sentences_containing(std::string_view lemma) const;

  std::optional<TermId> term_id(std::string_view lemma) const;
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::size_t term_count() const { return terms_.size(); }
  std::span<const TermId> sentence_terms(SentenceIndex index) const;
  std::span<const Posting> postings(TermId id) const;

  bool operator==(const CorpusIndex& other) const {
    return sentences_ == other.sentences_ && vocabulary_ == other.vocabulary_;
  }

 private:
  std::vector<ProcessedSentence> sentences_;
  Vocabulary vocabulary_;
  std::unordered_map<std::string, SentenceIndex> by_id_;
  std::vector<std::string> terms_;
  std::unordered_map<std::string, TermId> term_lookup_;
  std::vector<std::size_t> sentence_offsets_;
  std::vector<TermId> sentence_terms_;
  std::vector<std::size_t> posting_offsets_;
  std::vector<Posting> postings_;
};

}  // namespace ksr
