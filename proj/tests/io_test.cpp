#include "ksr/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "ksr/error.hpp"
#include "ksr/pipeline.hpp"
#include "ksr/synthetic.hpp"
#include "test_util.hpp"

using namespace ksr;

namespace {

std::string expect_data_error(const std::string& input, auto reader) {
  std::istringstream in(input);
  try {
    reader(in);
  } catch (const DataError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no DataError for: " << input;
  return {};
}

CorpusIndex small_index() {
  synthetic::CorpusOptions opt;
  opt.sentences = 60;
  opt.lexicon_size = 200;
  opt.seed = 5;
  auto corpus = synthetic::generate_corpus(opt);
  return index_corpus(corpus.sentences, corpus.lemmas, StopwordList::english_default(), 100);
}

std::string dump_index(const CorpusIndex& index) {
  std::ostringstream out;
  io::write_index(out, index);
  return out.str();
}

}  // namespace

TEST(CorpusJsonl, RoundTripAndBlankLines) {
  std::vector<RawSentence> in = {{"a1", "Hello \"world\"."}, {"b2", "Ünïcode — ok"}};
  std::ostringstream out;
  io::write_corpus_jsonl(out, in);
  std::istringstream back("\n" + out.str() + "   \n");
  auto read = io::read_corpus_jsonl(back);
  ASSERT_EQ(read.size(), 2u);
  EXPECT_EQ(read[0].id, "a1");
  EXPECT_EQ(read[0].text, "Hello \"world\".");
  EXPECT_EQ(read[1].text, "Ünïcode — ok");
}

TEST(CorpusJsonl, ErrorsNameTheLine) {
  auto read = [](std::istream& in) { io::read_corpus_jsonl(in); };
  EXPECT_NE(expect_data_error("{\"id\":\"a\",\"text\":\"x\"}\n{oops\n", read).find("line 2"), std::string::npos);
  EXPECT_NE(expect_data_error("\n\n{\"id\":\"a\"}\n", read).find("line 3"), std::string::npos);
  EXPECT_NE(expect_data_error("{\"id\":\"\",\"text\":\"x\"}\n", read).find("line 1"), std::string::npos);
  expect_data_error("{\"id\":3,\"text\":\"x\"}\n", read);
}

TEST(KeywordSetsJsonl, RoundTrip) {
  KeywordSequence seq{"s1", {}};
  seq.sets.push_back({{{"time", 0.6}, {"film", 0.4}}, 0});
  seq.sets.push_back({{{"work", 1.0}}, 1});
  std::ostringstream out;
  io::write_keyword_sets_jsonl(out, {seq, seq});
  std::istringstream in(out.str());
  auto read = io::read_keyword_sets_jsonl(in);
  ASSERT_EQ(read.size(), 2u);
  EXPECT_EQ(read[0], seq);
}

TEST(KeywordSetsJsonl, RejectsInvalidSets) {
  auto read = [](std::istream& in) { io::read_keyword_sets_jsonl(in); };
  // Increasing probabilities.
  auto msg = expect_data_error(
      R"({"sentence_id":"s","keyword_sets":[[{"word":"a","p":0.2},{"word":"b","p":0.8}]]})", read);
  EXPECT_NE(msg.find("line 1"), std::string::npos);
  expect_data_error(R"({"sentence_id":"s","keyword_sets":[[]]})", read);
  expect_data_error(R"({"sentence_id":"s","keyword_sets":[[{"word":"a","p":0.5},{"word":"a","p":0.5}]]})", read);
}

TEST(ResultsJsonl, WriteThenRead) {
  auto index = ksr::testing::make_index({{"a", {"x", "y"}}, {"b", {"y"}}, {"c", {"z"}}});
  Scorer scorer(index, {});
  Retriever retriever(scorer);
  KeywordSequence seq{"a", {{{{"x", 0.7}, {"z", 0.3}}, 0}, {{{"y", 1.0}}, 1}}};
  auto result = retriever.beam_search(seq);
  std::ostringstream out;
  io::write_results_jsonl(out, index, {result});
  std::istringstream in(out.str());
  auto read = io::read_results_jsonl(in);
  ASSERT_EQ(read.size(), 1u);
  EXPECT_EQ(read[0].sentence_id, "a");
  EXPECT_EQ(read[0].num_sets, 2u);
  ASSERT_EQ(read[0].ranked_ids.size(), result.ranked.size());
  EXPECT_EQ(read[0].ranked_ids.front(), "a");
}

TEST(IndexFile, RoundTripIsIdenticalAndByteStable) {
  auto index = small_index();
  const std::string bytes = dump_index(index);
  std::istringstream in(bytes);
  auto loaded = io::read_index(in);
  EXPECT_EQ(loaded, index);
  for (TermId t = 0; t < index.term_count(); ++t) {
    const auto& term = index.term(t);
    EXPECT_EQ(loaded.sentences_containing(term), index.sentences_containing(term));
  }
  EXPECT_EQ(dump_index(loaded), bytes);
  EXPECT_EQ(dump_index(small_index()), bytes);
}

TEST(IndexFile, DetectsCorruption) {
  const std::string bytes = dump_index(ksr::testing::make_index({{"a", {"x", "y"}}, {"b", {"y"}}}));
  auto read = [](std::istream& in) { io::read_index(in); };

  auto tampered = bytes;
  tampered.replace(tampered.find("\"x\""), 3, "\"q\"");
  EXPECT_NE(expect_data_error(tampered, read).find("checksum"), std::string::npos);

  auto wrong_version = bytes;
  wrong_version.replace(wrong_version.find("\"version\":1"), 11, "\"version\":9");
  EXPECT_NE(expect_data_error(wrong_version, read).find("version"), std::string::npos);

  auto wrong_format = bytes;
  wrong_format.replace(wrong_format.find(io::kIndexFormat), 3, "xyz");
  EXPECT_NE(expect_data_error(wrong_format, read).find("format"), std::string::npos);

  expect_data_error(bytes.substr(0, bytes.size() / 2), read);
  expect_data_error("{}", read);
}

TEST(Fnv1a, KnownVectors) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Profile, ReadsAnchorsAndValidates) {
  std::istringstream in(R"({"1": 0.0866, "5": 0.2490, "10": 0.3640, "15": 0.4628, "20": 0.5515})");
  auto p = io::read_profile(in, 10);
  EXPECT_EQ(p.topk_accuracy, ClassifierProfile::masked_contrastive().topk_accuracy);
  EXPECT_EQ(p.k, 10u);
  auto read = [](std::istream& s) { io::read_profile(s, 10); };
  expect_data_error("[1, 2]", read);
  expect_data_error(R"({"one": 0.5})", read);
  expect_data_error(R"({"1": "high"})", read);
  std::istringstream decreasing(R"({"1": 0.5, "5": 0.4})");
  EXPECT_THROW(io::read_profile(decreasing, 5), ConfigError);
}

TEST(SimilarityTable, Reads) {
  std::istringstream in(R"({"time": ["year", "day"], "film": []})");
  auto t = io::read_similarity_table(in);
  EXPECT_EQ(t.at("time"), (std::vector<std::string>{"year", "day"}));
  EXPECT_TRUE(t.at("film").empty());
  expect_data_error(R"({"time": "year"})", [](std::istream& s) { io::read_similarity_table(s); });
}

TEST(EmbeddingTable, ReadsRowsAndChecksDimension) {
  std::istringstream in("{\"word\":\"a\",\"vec\":[1,2,3]}\n{\"word\":\"b\",\"vec\":[4,5,6]}\n");
  auto t = io::read_embedding_table(in);
  ASSERT_EQ(t.words.size(), 2u);
  EXPECT_EQ(t.dimension(), 3u);
  EXPECT_EQ(t.vectors(1, 2), 6.0);
  auto msg = expect_data_error("{\"word\":\"a\",\"vec\":[1,2]}\n{\"word\":\"b\",\"vec\":[1]}\n",
                               [](std::istream& s) { io::read_embedding_table(s); });
  EXPECT_NE(msg.find("line 2"), std::string::npos);
}
