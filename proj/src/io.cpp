#include "ksr/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "ksr/error.hpp"

namespace ksr::io {

using nlohmann::json;

namespace {

template <class F>
void for_each_json_line(std::istream& in, const char* what, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      f(j, line_no);
    } catch (const json::exception& e) {
      throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<RawSentence> read_corpus_jsonl(std::istream& in) {
  std::vector<RawSentence> out;
  for_each_json_line(in, "corpus", [&](const json& j, std::size_t) {
    if (!j.is_object() || !j.contains("id") || !j.contains("text")) {
      throw DataError("expected an object with \"id\" and \"text\"");
    }
    RawSentence s{j.at("id").get<std::string>(), j.at("text").get<std::string>()};
    if (s.id.empty()) throw DataError("empty sentence id");
    if (s.text.empty()) throw DataError("empty text for sentence '" + s.id + "'");
    out.push_back(std::move(s));
  });
  return out;
}

void write_corpus_jsonl(std::ostream& out, const std::vector<RawSentence>& sentences) {
  for (const auto& s : sentences) out << json{{"id", s.id}, {"text", s.text}}.dump() << '\n';
}

std::vector<KeywordSequence> read_keyword_sets_jsonl(std::istream& in) {
  std::vector<KeywordSequence> out;
  for_each_json_line(in, "keyword sets", [&](const json& j, std::size_t) {
    KeywordSequence seq;
    seq.sentence_id = j.at("sentence_id").get<std::string>();
    for (const auto& js : j.at("keyword_sets")) {
      KeywordSet set;
      set.position = seq.sets.size();
      for (const auto& jc : js) set.candidates.push_back({jc.at("word").get<std::string>(), jc.at("p").get<double>()});
      seq.sets.push_back(std::move(set));
    }
    seq.validate();
    out.push_back(std::move(seq));
  });
  return out;
}

void write_keyword_sets_jsonl(std::ostream& out, const std::vector<KeywordSequence>& sequences) {
  for (const auto& seq : sequences) {
    json sets = json::array();
    for (const auto& set : seq.sets) {
      json js = json::array();
      for (const auto& c : set.candidates) js.push_back({{"word", c.word}, {"p", c.probability}});
      sets.push_back(std::move(js));
    }
    out << json{{"sentence_id", seq.sentence_id}, {"keyword_sets", std::move(sets)}}.dump() << '\n';
  }
}

void write_results_jsonl(std::ostream& out, const CorpusIndex& corpus, const std::vector<RetrievalResult>& results) {
  for (const auto& r : results) {
    json ranked = json::array();
    for (const auto& s : r.ranked) ranked.push_back({{"id", corpus.sentence(s.sentence).id}, {"score", s.score}});
    json beam = json::array();
    for (const auto& q : r.best_queries) {
      json prov = json::array();
      for (const auto& p : q.query.provenance) prov.push_back({p.set_index, p.rank});
      beam.push_back({{"keywords", q.query.keywords}, {"provenance", prov}, {"score", q.score.value}});
    }
    out << json{{"sentence_id", r.sentence_id},
                {"strategy", r.metadata.strategy},
                {"scorer", std::string(to_string(r.metadata.scorer))},
                {"num_sets", r.metadata.num_sets},
                {"k", r.metadata.k},
                {"beam_width", r.metadata.beam_width},
                {"ranked", std::move(ranked)},
                {"beam", std::move(beam)}}
               .dump()
        << '\n';
  }
}

std::vector<StoredResult> read_results_jsonl(std::istream& in) {
  std::vector<StoredResult> out;
  for_each_json_line(in, "results", [&](const json& j, std::size_t) {
    StoredResult r;
    r.sentence_id = j.at("sentence_id").get<std::string>();
    r.num_sets = j.at("num_sets").get<std::size_t>();
    for (const auto& e : j.at("ranked")) r.ranked_ids.push_back(e.at("id").get<std::string>());
    out.push_back(std::move(r));
  });
  return out;
}

void write_index(std::ostream& out, const CorpusIndex& index) {
  json sentences = json::array();
  for (const auto& s : index.sentences()) {
    sentences.push_back({{"id", s.id}, {"text", s.original_text}, {"lemmas", s.lemmas}});
  }
  json vocabulary = json::array();
  for (const auto& e : index.vocabulary().entries()) vocabulary.push_back({e.lemma, e.frequency});
  const json payload{{"sentences", std::move(sentences)}, {"vocabulary", std::move(vocabulary)}};
  const std::string dumped = payload.dump();
  out << json{{"format", kIndexFormat}, {"version", kIndexVersion}, {"checksum", hex64(fnv1a64(dumped))},
              {"payload", payload}}
             .dump()
      << '\n';
}

CorpusIndex read_index(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("index: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kIndexFormat) throw DataError("index: unknown format tag");
    if (j.at("version").get<int>() != kIndexVersion) throw DataError("index: unsupported version");
    const json& payload = j.at("payload");
    if (hex64(fnv1a64(payload.dump())) != j.at("checksum").get<std::string>()) {
      throw DataError("index: checksum mismatch");
    }
    std::vector<ProcessedSentence> sentences;
    for (const auto& s : payload.at("sentences")) {
      sentences.push_back({s.at("id").get<std::string>(), s.at("lemmas").get<std::vector<std::string>>(),
                           s.at("text").get<std::string>()});
    }
    std::vector<Vocabulary::Entry> entries;
    for (const auto& e : payload.at("vocabulary")) entries.push_back({e.at(0).get<std::string>(), e.at(1).get<std::uint64_t>()});
    return CorpusIndex::build(std::move(sentences), Vocabulary(std::move(entries)));
  } catch (const json::exception& e) {
    throw DataError(std::string("index: ") + e.what());
  }
}

ClassifierProfile read_profile(std::istream& in, std::size_t k, std::size_t vocabulary_size) {
  ClassifierProfile profile;
  profile.k = k;
  profile.vocabulary_size = vocabulary_size;
  try {
    const json j = json::parse(in);
    if (!j.is_object()) throw DataError("profile: expected a JSON object of k -> accuracy");
    for (const auto& [key, value] : j.items()) {
      std::size_t pos = 0;
      const auto anchor = std::stoul(key, &pos);
      if (pos != key.size()) throw DataError("profile: bad key '" + key + "'");
      profile.topk_accuracy[anchor] = value.get<double>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("profile: ") + e.what());
  } catch (const std::logic_error& e) {
    throw DataError(std::string("profile: ") + e.what());
  }
  profile.validate();
  return profile;
}

std::unordered_map<std::string, std::vector<std::string>> read_similarity_table(std::istream& in) {
  try {
    return json::parse(in).get<std::unordered_map<std::string, std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("similarity table: ") + e.what());
  }
}

EmbeddingTable read_embedding_table(std::istream& in) {
  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  for_each_json_line(in, "embedding table", [&](const json& j, std::size_t) {
    auto vec = j.at("vec").get<std::vector<double>>();
    if (vec.empty()) throw DataError("empty vector");
    if (!rows.empty() && vec.size() != rows.front().size()) throw DataError("inconsistent vector dimension");
    words.push_back(j.at("word").get<std::string>());
    rows.push_back(std::move(vec));
  });
  EmbeddingTable table;
  table.words = std::move(words);
  if (rows.empty()) return table;
  table.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      table.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return table;
}

}  // namespace ksr::io
