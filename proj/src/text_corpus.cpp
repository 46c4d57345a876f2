#include "ksr/text_corpus.hpp"

#include <algorithm>
#include <istream>
#include <map>

#include "ksr/error.hpp"

namespace ksr {
namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_separator_codepoint(char32_t cp) {
  if (cp < 0x80) {
    const bool alnum = (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    return !alnum;
  }
  if (cp >= 0x80 && cp <= 0xBF) return true;  // C1 controls, NBSP, Latin-1 punctuation
  if (cp == 0xD7 || cp == 0xF7) return true;
  if (cp >= 0x2000 && cp <= 0x206F) return true;
  if (cp >= 0x3000 && cp <= 0x303F) return true;
  return false;
}

// Decodes one code point starting at s[i]; malformed bytes decode as
// themselves with length 1 so tokenization never fails.
char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    len = 1;
    return b0;
  }
  std::size_t need = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    need = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    need = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    need = 3;
    cp = b0 & 0x07;
  } else {
    len = 1;
    return b0;
  }
  if (i + need >= s.size()) {
    len = 1;
    return b0;
  }
  for (std::size_t k = 1; k <= need; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      len = 1;
      return b0;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  len = need + 1;
  return cp;
}

}  // namespace

LemmaDictionary::LemmaDictionary(std::unordered_map<std::string, std::string> entries) {
  for (auto& [surface, lemma] : entries) {
    entries_.emplace(ascii_lower(surface), ascii_lower(lemma));
  }
  for (const auto& [surface, lemma] : entries_) {
    if (lemma.empty()) throw DataError("lemma dictionary: empty lemma for '" + surface + "'");
    auto it = entries_.find(lemma);
    if (it != entries_.end() && it->second != lemma) {
      throw DataError("lemma dictionary: lemma '" + lemma + "' of '" + surface +
                      "' is itself mapped to '" + it->second + "'");
    }
  }
}

LemmaDictionary LemmaDictionary::load_tsv(std::istream& in) {
  std::unordered_map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto tab = view.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError("lemma dictionary line " + std::to_string(line_no) + ": expected surface<TAB>lemma");
    }
    const auto surface = trim(view.substr(0, tab));
    const auto lemma = trim(view.substr(tab + 1));
    if (surface.empty() || lemma.empty()) {
      throw DataError("lemma dictionary line " + std::to_string(line_no) + ": empty field");
    }
    entries.insert_or_assign(ascii_lower(surface), ascii_lower(lemma));
  }
  return LemmaDictionary(std::move(entries));
}

std::string LemmaDictionary::lemmatize(std::string_view token) const {
  auto key = ascii_lower(token);
  auto it = entries_.find(key);
  return it == entries_.end() ? key : it->second;
}

StopwordList::StopwordList(const std::vector<std::string>& words) {
  for (const auto& w : words) {
    auto lowered = ascii_lower(trim(w));
    if (!lowered.empty()) words_.insert(std::move(lowered));
  }
}

StopwordList StopwordList::english_default() {
  return StopwordList({
      // articles and determiners
      "a", "an", "the", "this", "these", "those", "some", "any", "each", "every",
      // be / have / do
      "is", "am", "are", "was", "were", "be", "been", "being", "has", "have", "had", "having",
      "do", "does", "did",
      // prepositions
      "of", "in", "on", "at", "to", "for", "with", "by", "from", "as", "into", "onto", "about",
      "than", "via",
      // conjunctions and relatives
      "and", "or", "but", "nor", "so", "that", "which", "who", "whom", "whose", "if",
      // pronouns
      "i", "me", "my", "you", "your", "he", "him", "his", "she", "it", "its", "we", "us", "our",
      "they", "them", "their", "there",
      // clitic fragments left by the tokenizer
      "s", "t", "d", "ll", "re", "ve", "m",
  });
}

StopwordList StopwordList::load(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    words.emplace_back(view);
  }
  return StopwordList(words);
}

bool StopwordList::contains(std::string_view word) const {
  return words_.count(ascii_lower(word)) > 0;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(text, i, len);
    if (is_separator_codepoint(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else if (cp < 0x80) {
      current.push_back(static_cast<char>(cp >= 'A' && cp <= 'Z' ? cp - 'A' + 'a' : cp));
    } else {
      current.append(text.substr(i, len));
    }
    i += len;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

ProcessedSentence preprocess(const RawSentence& sentence, const LemmaDictionary& dict,
                             const StopwordList& stop) {
  ProcessedSentence out{sentence.id, {}, sentence.text};
  for (const auto& token : tokenize(sentence.text)) {
    auto lemma = dict.lemmatize(token);
    if (!stop.contains(lemma)) out.lemmas.push_back(std::move(lemma));
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<Entry> entries) : entries_(std::move(entries)) {
  lookup_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!lookup_.emplace(entries_[i].lemma, i).second) {
      throw DataError("vocabulary: duplicate lemma '" + entries_[i].lemma + "'");
    }
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view lemma) const {
  auto it = lookup_.find(std::string(lemma));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const ProcessedSentence> sentences, std::size_t top_v,
                            std::vector<std::string>* warnings) {
  if (top_v < 1) throw ConfigError("vocabulary size must be at least 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& s : sentences) {
    for (const auto& lemma : s.lemmas) ++counts[lemma];
  }
  std::vector<Vocabulary::Entry> entries;
  entries.reserve(counts.size());
  for (auto& [lemma, freq] : counts) entries.push_back({lemma, freq});
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.lemma < b.lemma;
  });
  if (entries.size() < top_v) {
    if (warnings) {
      warnings->push_back("vocabulary: corpus has only " + std::to_string(entries.size()) +
                          " distinct lemmas, fewer than the requested " + std::to_string(top_v));
    }
  } else {
    entries.resize(top_v);
  }
  return Vocabulary(std::move(entries));
}

CorpusIndex CorpusIndex::build(std::vector<ProcessedSentence> sentences, Vocabulary vocabulary) {
  std::sort(sentences.begin(), sentences.end(),
            [](const ProcessedSentence& a, const ProcessedSentence& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sentences.size(); ++i) {
    if (sentences[i].id == sentences[i - 1].id) {
      throw DataError("duplicate sentence id '" + sentences[i].id + "'");
    }
  }

  CorpusIndex index;
  index.sentences_ = std::move(sentences);
  index.vocabulary_ = std::move(vocabulary);
  index.by_id_.reserve(index.sentences_.size());
  index.sentence_offsets_.reserve(index.sentences_.size() + 1);
  index.sentence_offsets_.push_back(0);

  std::vector<std::uint32_t> df;
  for (std::size_t pos = 0; pos < index.sentences_.size(); ++pos) {
    const auto& s = index.sentences_[pos];
    index.by_id_.emplace(s.id, static_cast<SentenceIndex>(pos));
    for (const auto& lemma : s.lemmas) {
      auto [it, inserted] = index.term_lookup_.emplace(lemma, static_cast<TermId>(index.terms_.size()));
      if (inserted) {
        index.terms_.push_back(lemma);
        df.push_back(0);
      }
      index.sentence_terms_.push_back(it->second);
    }
    index.sentence_offsets_.push_back(index.sentence_terms_.size());
  }

  // Count postings per term, then fill in sentence order so lists come out sorted.
  std::vector<std::uint32_t> last_seen(index.terms_.size(), UINT32_MAX);
  for (std::size_t pos = 0; pos < index.sentences_.size(); ++pos) {
    for (TermId t : index.sentence_terms(static_cast<SentenceIndex>(pos))) {
      if (last_seen[t] != pos) {
        last_seen[t] = static_cast<std::uint32_t>(pos);
        ++df[t];
      }
    }
  }
  index.posting_offsets_.assign(index.terms_.size() + 1, 0);
  for (std::size_t t = 0; t < df.size(); ++t) {
    index.posting_offsets_[t + 1] = index.posting_offsets_[t] + df[t];
  }
  index.postings_.resize(index.posting_offsets_.back());
  std::vector<std::size_t> fill(index.posting_offsets_.begin(), index.posting_offsets_.end() - 1);
  std::fill(last_seen.begin(), last_seen.end(), UINT32_MAX);
  for (std::size_t pos = 0; pos < index.sentences_.size(); ++pos) {
    for (TermId t : index.sentence_terms(static_cast<SentenceIndex>(pos))) {
      if (last_seen[t] != pos) {
        last_seen[t] = static_cast<std::uint32_t>(pos);
        index.postings_[fill[t]++] = {static_cast<SentenceIndex>(pos), 1};
      } else {
        ++index.postings_[fill[t] - 1].tf;
      }
    }
  }
  return index;
}

std::optional<SentenceIndex> CorpusIndex::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> CorpusIndex::sentences_containing(std::string_view lemma) const {
  std::vector<std::string> ids;
  if (auto t = term_id(lemma)) {
    for (const auto& p : postings(*t)) ids.push_back(sentences_[p.sentence].id);
  }
  return ids;
}

std::optional<TermId> CorpusIndex::term_id(std::string_view lemma) const {
  auto it = term_lookup_.find(std::string(lemma));
  if (it == term_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const TermId> CorpusIndex::sentence_terms(SentenceIndex index) const {
  const auto begin = sentence_offsets_.at(index);
  const auto end = sentence_offsets_.at(index + 1);
  return {sentence_terms_.data() + begin, end - begin};
}

std::span<const Posting> CorpusIndex::postings(TermId id) const {
  const auto begin = posting_offsets_.at(id);
  const auto end = posting_offsets_.at(id + 1);
  return {postings_.data() + begin, end - begin};
}

}  // namespace ksr
