#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "ksr/representation.hpp"
#include "ksr/retrieval.hpp"
#include "ksr/simulator.hpp"
#include "ksr/text_corpus.hpp"

namespace ksr::io {

/// JSON Lines, one {"id": str, "text": str} per line. Blank lines are
/// skipped. Throws DataError with the 1-based line number on malformed input.
std::vector<RawSentence> read_corpus_jsonl(std::istream& in);
void write_corpus_jsonl(std::ostream& out, const std::vector<RawSentence>& sentences);

/// {"sentence_id": str, "keyword_sets": [[{"word": str, "p": float}, ...], ...]}
std::vector<KeywordSequence> read_keyword_sets_jsonl(std::istream& in);
void write_keyword_sets_jsonl(std::ostream& out, const std::vector<KeywordSequence>& sequences);

/// {"sentence_id", "strategy", "scorer", "num_sets", "k", "beam_width",
///  "ranked": [{"id", "score"}], "beam": [{"keywords", "provenance", "score"}]}
void write_results_jsonl(std::ostream& out, const CorpusIndex& corpus, const std::vector<RetrievalResult>& results);

struct StoredResult {
  std::string sentence_id;
  std::size_t num_sets = 0;
  std::vector<std::string> ranked_ids;
};
std::vector<StoredResult> read_results_jsonl(std::istream& in);

inline constexpr const char* kIndexFormat = "ksr-corpus-index";
inline constexpr int kIndexVersion = 1;

/// Index container: {"format", "version", "checksum", "payload"} where the
/// checksum is FNV-1a 64 (hex) over the compact payload dump. Output is
/// byte-identical for identical indexes.
void write_index(std::ostream& out, const CorpusIndex& index);
/// Rebuilds the inverted index on load. Throws DataError on a format, version
/// or checksum mismatch.
CorpusIndex read_index(std::istream& in);

/// JSON object mapping k (as a string key) to cumulative accuracy in [0, 1].
ClassifierProfile read_profile(std::istream& in, std::size_t k, std::size_t vocabulary_size = 100);

/// JSON object mapping a word to its ordered neighbour list.
std::unordered_map<std::string, std::vector<std::string>> read_similarity_table(std::istream& in);

struct EmbeddingTable {
  std::vector<std::string> words;
  Matrix vectors;  // one row per word

  std::size_t dimension() const { return static_cast<std::size_t>(vectors.cols()); }
};
/// JSON Lines {"word": str, "vec": [float...]} with a common dimension.
EmbeddingTable read_embedding_table(std::istream& in);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ksr::io
