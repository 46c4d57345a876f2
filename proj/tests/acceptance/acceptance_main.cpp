// Acceptance suite: runs the ten release criteria and prints one PASS/FAIL
// line per criterion. Exit status is non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../test_util.hpp"
#include "ksr/aho_corasick.hpp"
#include "ksr/evaluation.hpp"
#include "ksr/pipeline.hpp"
#include "ksr/representation.hpp"
#include "ksr/retrieval.hpp"
#include "ksr/simulator.hpp"
#include "ksr/synthetic.hpp"
#include "oracles.hpp"
#include "toy_problem.hpp"

using namespace ksr;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

KeywordSequence random_sequence(std::mt19937_64& rng, std::size_t L, std::size_t k, std::size_t alphabet) {
  KeywordSequence seq;
  for (std::size_t l = 0; l < L; ++l) {
    KeywordSet set;
    set.position = l;
    while (set.candidates.size() < k) {
      auto w = "w" + std::to_string(rng() % alphabet);
      bool fresh = std::none_of(set.candidates.begin(), set.candidates.end(), [&](auto& c) { return c.word == w; });
      if (fresh) set.candidates.push_back({w, 1.0 / static_cast<double>(set.candidates.size() + 1)});
    }
    seq.sets.push_back(std::move(set));
  }
  return seq;
}

std::vector<std::string> ranked_ids(const CorpusIndex& idx, const RetrievalResult& r) {
  std::vector<std::string> out;
  for (const auto& s : r.ranked) out.push_back(idx.sentence(s.sentence).id);
  return out;
}

std::size_t in_vocab_count(const CorpusIndex& idx, const ProcessedSentence& s) {
  return static_cast<std::size_t>(
      std::count_if(s.lemmas.begin(), s.lemmas.end(), [&](auto& l) { return idx.vocabulary().contains(l); }));
}

// ---------------------------------------------------------------------------

Outcome c1_beam_exhaustive() {
  std::mt19937_64 rng(101);
  std::size_t score_mismatch = 0, ranking_mismatch = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto idx = testing::random_index(rng, 20 + rng() % 21, 10 + rng() % 10, 8);
    const std::size_t L = 1 + rng() % 4, k = 1 + rng() % 4;
    auto seq = random_sequence(rng, L, k, 16);
    const CountMode mode = trial % 2 ? CountMode::distinct : CountMode::multiplicity;
    const std::size_t m_score = 1 + rng() % 5;
    Scorer scorer(idx, {ScorerKind::aho_corasick, m_score, mode});
    Retriever r(scorer);
    BeamOptions opt;
    opt.beam_width = static_cast<std::size_t>(std::pow(k, L));
    auto res = r.beam_search(seq, opt);
    auto ex = oracle::exhaustive_search(seq, idx, m_score, mode, kMinResults, opt.max_results);
    if (res.best_queries.front().score.value != ex.best_value) ++score_mismatch;
    std::vector<SentenceIndex> got;
    for (const auto& s : res.ranked) got.push_back(s.sentence);
    if (got != ex.ranking) ++ranking_mismatch;
  }
  return {score_mismatch == 0 && ranking_mismatch == 0,
          fmt("200 instances: %zu score and %zu ranking mismatches", score_mismatch, ranking_mismatch)};
}

Outcome c2_automaton_oracle() {
  std::mt19937_64 rng(202);
  std::size_t bad = 0;
  auto word = [&](std::size_t max_len) {
    std::string s(1 + rng() % max_len, 'a');
    for (auto& ch : s) ch = static_cast<char>('a' + rng() % 3);
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> patterns(1 + rng() % 8);
    for (auto& p : patterns) p = word(4);
    std::vector<std::string> tokens(rng() % 12);
    for (auto& t : tokens) t = word(5);
    std::string text;
    for (const auto& t : tokens) text += t + " ";
    const AhoCorasick ac(patterns);

    // Raw substring occurrences, counted per pattern.
    std::vector<std::size_t> naive(patterns.size()), found(patterns.size());
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      for (std::size_t pos = text.find(patterns[p]); pos != std::string::npos; pos = text.find(patterns[p], pos + 1)) {
        ++naive[p];
      }
    }
    for (const auto& m : ac.find_all(text)) ++found[m.pattern];
    // Whole-token occurrences.
    auto counts = ac.count_tokens(tokens);
    bool ok = naive == found;
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      const auto expect = static_cast<std::uint32_t>(std::count(tokens.begin(), tokens.end(), patterns[p]));
      ok = ok && counts[p] == expect;
    }
    bad += !ok;
  }
  return {bad == 0, fmt("1000 random cases: %zu discrepancies", bad)};
}

Outcome c3_simulator_calibration() {
  auto profile = ClassifierProfile::masked_contrastive(20);
  const auto dist = derive_rank_distribution(profile);
  std::vector<Vocabulary::Entry> entries;
  for (std::size_t i = 0; i < 100; ++i) entries.push_back({"v" + std::to_string(i), 1000 - i});
  const Vocabulary vocab(entries);
  std::mt19937_64 rng(303);
  std::vector<std::size_t> at_rank(21, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto gt = "v" + std::to_string(i % 100);
    ++at_rank[rank_of(sample_keyword_set(gt, dist, vocab, rng), gt)];
  }
  double worst = 0;
  std::string detail;
  for (std::size_t k : {1, 5, 10, 15, 20}) {
    const auto hits = std::accumulate(at_rank.begin() + 1, at_rank.begin() + static_cast<long>(k) + 1, std::size_t{0});
    const double acc = static_cast<double>(hits) / n;
    worst = std::max(worst, std::abs(acc - profile.topk_accuracy.at(k)));
    detail += fmt(" top-%zu %.2f%%", k, 100 * acc);
  }
  return {worst <= 0.005, fmt("100k samples:%s; max deviation %.3f%%", detail.c_str(), 100 * worst)};
}

// 500 sentences whose in-vocabulary lemmas are repeat-free and where no
// sentence's keyword set contains another's, so every sentence is uniquely
// identified by its own keywords. Filtering changes the vocabulary, so the
// selection is repeated against the vocabulary of the previous selection
// until it stops changing.
CorpusIndex oracle_ceiling_corpus() {
  synthetic::CorpusOptions opt;
  opt.sentences = 4000;
  opt.seed = 7;
  const auto generated = synthetic::generate_corpus(opt);
  const auto stop = StopwordList::english_default();
  std::vector<ProcessedSentence> pool;
  for (const auto& s : generated.sentences) pool.push_back(preprocess(s, generated.lemmas, stop));
  Vocabulary vocab = build_vocabulary(pool, 100);
  std::vector<std::size_t> chosen;
  for (int round = 0; round < 50; ++round) {
    std::vector<std::size_t> next;
    std::vector<std::vector<std::string>> keyword_sets;
    for (std::size_t i = 0; i < pool.size() && next.size() < 500; ++i) {
      std::vector<std::string> kw;
      for (const auto& l : pool[i].lemmas) {
        if (vocab.contains(l)) kw.push_back(l);
      }
      std::sort(kw.begin(), kw.end());
      if (kw.size() < 5 || std::adjacent_find(kw.begin(), kw.end()) != kw.end()) continue;
      const bool nested = std::any_of(keyword_sets.begin(), keyword_sets.end(), [&](const auto& other) {
        return std::includes(kw.begin(), kw.end(), other.begin(), other.end()) ||
               std::includes(other.begin(), other.end(), kw.begin(), kw.end());
      });
      if (nested) continue;
      keyword_sets.push_back(std::move(kw));
      next.push_back(i);
    }
    if (next == chosen) break;
    chosen = std::move(next);
    std::vector<ProcessedSentence> subset;
    for (auto i : chosen) subset.push_back(pool[i]);
    vocab = build_vocabulary(subset, 100);
  }
  std::vector<ProcessedSentence> subset;
  for (auto i : chosen) subset.push_back(pool[i]);
  auto final_vocab = build_vocabulary(subset, 100);
  return CorpusIndex::build(std::move(subset), std::move(final_vocab));
}

Outcome c4_oracle_ceiling() {
  const auto idx = oracle_ceiling_corpus();
  std::size_t short_sentences = 0;
  for (const auto& s : idx.sentences()) short_sentences += in_vocab_count(idx, s) < 5;
  const RelevanceIndex rel(idx);
  auto recall_at_1 = [&](std::size_t k, Strategy strategy) {
    const auto seqs = simulate_corpus(idx, derive_rank_distribution(ClassifierProfile::perfect(k)), 0);
    const Scorer scorer(idx, {});
    const Retriever r(scorer);
    double hits = 0;
    for (const auto& q : seqs) {
      hits += recall_at_n({ranked_ids(idx, retrieve(r, q, strategy, {})), rel.relevant(q.sentence_id)}, 1);
    }
    return hits / static_cast<double>(seqs.size());
  };
  const double bsr = recall_at_1(10, Strategy::beam), gs = recall_at_1(10, Strategy::greedy);
  const double bsr_k1 = recall_at_1(1, Strategy::beam);
  const bool fixture_ok = idx.size() == 500 && short_sentences == 0;
  return {fixture_ok && bsr == 1.0 && gs == 1.0,
          fmt("%zu sentences, k=10 with truth at rank 1: BSR recall@1 %.2f%%, GS recall@1 %.2f%% "
              "(diagnostic: BSR with k=1 sets %.2f%%)",
              idx.size(), 100 * bsr, 100 * gs, 100 * bsr_k1)};
}

Outcome c5_directional_scorers() {
  synthetic::CorpusOptions opt;
  opt.sentences = 300;
  opt.seed = 7;
  const auto generated = synthetic::generate_corpus(opt);
  const auto idx = index_corpus(generated.sentences, generated.lemmas, StopwordList::english_default(), 100);
  std::map<ScorerKind, std::array<double, 2>> mean;
  const int seeds = 10;
  std::size_t queries = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    PipelineConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const auto report = run_pipeline(idx, cfg);
    queries = report.simulated;
    for (const auto& run : report.runs) {
      for (std::size_t i = 0; i < 2; ++i) mean[run.scorer][i] += run.strata[i].recall / seeds;
    }
  }
  const auto& ac = mean[ScorerKind::aho_corasick];
  const auto& ld = mean[ScorerKind::levenshtein];
  const auto& tf = mean[ScorerKind::tfidf];
  const bool order = ac[0] > ld[0] && ld[0] > tf[0];
  const bool longer = ac[1] > ac[0];
  return {order && longer,
          fmt("%zu sentences, %zu queries x %d seeds, recall@5 T>=5: AC %.2f%%, LD %.2f%%, TF-IDF %.2f%% (%s); "
              "AC T>=7 %.2f%% vs T>=5 %.2f%% (%s)",
              idx.size(), queries, seeds, 100 * ac[0], 100 * ld[0], 100 * tf[0],
              order ? "AC > LD > TF-IDF holds" : "AC > LD > TF-IDF violated", 100 * ac[1], 100 * ac[0],
              longer ? "holds" : "violated")};
}

Outcome c6_keyword_set_count_trend() {
  synthetic::CorpusOptions opt;
  opt.sentences = 1000;
  opt.seed = 7;
  const auto generated = synthetic::generate_corpus(opt);
  const auto idx = index_corpus(generated.sentences, generated.lemmas, StopwordList::english_default(), 100);
  const RelevanceIndex rel(idx);
  const auto dist = derive_rank_distribution(ClassifierProfile::masked_contrastive());
  const Scorer scorer(idx, {});
  const Retriever r(scorer);
  const int seeds = 3;
  std::vector<double> bsr(10, 0.0), gs(10, 0.0);
  std::size_t per_seed = 0, total = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto seqs = simulate_corpus(idx, dist, static_cast<std::uint64_t>(seed), {}, 9);
    per_seed = seqs.size();
    total += seqs.size();
    for (const auto& full : seqs) {
      const auto relevant = rel.relevant(full.sentence_id);
      for (std::size_t L = 3; L <= 9; ++L) {
        KeywordSequence q = full;
        q.sets.resize(L);
        bsr[L] += recall_at_n({ranked_ids(idx, r.beam_search(q)), relevant}, 5);
        gs[L] += recall_at_n({ranked_ids(idx, r.greedy(q)), relevant}, 5);
      }
    }
  }
  bool trend = true, dominance = true;
  std::string curve;
  for (std::size_t L = 3; L <= 9; ++L) {
    bsr[L] /= static_cast<double>(total);
    gs[L] /= static_cast<double>(total);
    if (L > 3 && bsr[L] < bsr[L - 1] - 0.02) trend = false;
    if (bsr[L] < gs[L]) dominance = false;
    curve += fmt(" L=%zu %.1f/%.1f", L, 100 * bsr[L], 100 * gs[L]);
  }
  return {trend && dominance,
          fmt("%zu sentences with >=9 sets x %d seeds, recall@5 %% BSR/GS:%s; non-decreasing within 2pp: %s; "
              "BSR >= GS at every L: %s",
              per_seed, seeds, curve.c_str(), trend ? "yes" : "no", dominance ? "yes" : "no")};
}

Outcome c7_loss_numerics() {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto random = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
  };
  auto rel = [](const Matrix& a, const Matrix& b) {
    const double d = std::max(a.norm(), b.norm());
    return d == 0 ? 0.0 : (a - b).norm() / d;
  };
  double ct_err = 0, sup_err = 0;
  for (int point = 0; point < 20; ++point) {
    const Matrix h = random(6, 4), w = random(6, 4);
    const auto ct = masked_contrastive_loss(h, w, 0.3);
    ct_err = std::max(ct_err, rel(ct.gradient, oracle::numeric_gradient(
                                                   [&](const Matrix& x) { return oracle::contrastive_loss(x, w, 0.3); }, h)));
    const Matrix z = random(5, 9);
    std::vector<std::size_t> t(5);
    for (auto& x : t) x = rng() % 9;
    const auto sup = supervised_loss(z, t);
    sup_err = std::max(sup_err, rel(sup.gradient, oracle::numeric_gradient(
                                                      [&](const Matrix& x) { return oracle::cross_entropy(x, t); }, z)));
  }
  const double single = masked_contrastive_loss(random(1, 4), random(1, 4), 0.3).loss;
  const std::vector<std::size_t> targets = {0, 42, 99};
  const double uniform = supervised_loss(Matrix::Zero(3, 100), targets).loss;
  const bool pass = ct_err < 1e-5 && sup_err < 1e-5 && single == 0.0 && std::abs(uniform - std::log(100.0)) < 1e-12;
  return {pass, fmt("max rel. error contrastive %.2e, supervised %.2e; M=1 loss %g; uniform CE - ln 100 = %.1e",
                    ct_err, sup_err, single, uniform - std::log(100.0))};
}

Outcome c8_training_smoke() {
  std::mt19937_64 rng(808);
  auto problem = oracle::make_toy_problem(10, 20, 16, 8, 0.5, rng);
  LossHyperparams hp;
  hp.alpha = hp.beta = 0.5;
  hp.temperature = 0.3;
  hp.mask_ratio = 0.1;
  auto run = oracle::train_toy_encoder(problem, 8, hp, 500, 0.5, 0.8, rng);
  return {run.accuracy > 0.8, fmt("10 classes x 20 samples: top-1 %.1f%% after %zu steps (loss %.3f -> %.3f)",
                                  100 * run.accuracy, run.steps, run.losses.front(), run.losses.back())};
}

Outcome c9_bleu() {
  std::ifstream in(KSR_TEST_DATA_DIR "/bleu_nltk_reference.jsonl");
  if (!in) return {false, "reference fixture missing"};
  std::string line;
  std::size_t rows = 0;
  double worst_ref = 0, worst_oracle = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    const std::vector<std::string> c = j["candidate"], r = j["reference"];
    for (auto [n, key] : {std::pair{1, "bleu1"}, {2, "bleu2"}, {4, "bleu4"}}) {
      const double got = bleu(c, r, static_cast<std::size_t>(n));
      worst_ref = std::max(worst_ref, std::abs(got - j[key].get<double>()));
      worst_oracle = std::max(worst_oracle, std::abs(got - oracle::bleu(c, r, static_cast<std::size_t>(n))));
    }
    ++rows;
  }
  const std::vector<std::string> a = {"during", "this", "time", "he", "worked", "on", "films"};
  const std::vector<std::string> shuffled = {"films", "on", "worked", "he", "time", "this", "during"};
  const double identical = bleu(a, a, 4), zero4 = bleu(shuffled, a, 4), one = bleu(shuffled, a, 1);
  const bool pass = rows == 50 && worst_ref <= 1e-9 && worst_oracle <= 1e-9 && identical == 1.0 && zero4 == 0.0 &&
                    one > 0.0;
  return {pass, fmt("%zu pairs: max |diff| vs reference evaluator %.1e, vs oracle %.1e; identical %.1f; "
                    "no 4-gram overlap BLEU-4 %.1f (BLEU-1 %.2f)",
                    rows, worst_ref, worst_oracle, identical, zero4, one)};
}

Outcome c10_performance() {
  synthetic::CorpusOptions opt;
  opt.sentences = 10000;
  opt.seed = 11;
  const auto generated = synthetic::generate_corpus(opt);
  const auto stop = StopwordList::english_default();
  auto t0 = Clock::now();
  const auto idx = index_corpus(generated.sentences, generated.lemmas, stop, 100);
  const double index_s = seconds_since(t0);

  std::vector<std::string> patterns;
  for (std::size_t i = 0; i < 10000; ++i) patterns.push_back(synthetic::pseudo_word(i));
  t0 = Clock::now();
  const AhoCorasick ac(patterns);
  const double rate = static_cast<double>(ac.pattern_count()) / std::max(seconds_since(t0), 1e-9);

  const auto dist = derive_rank_distribution(ClassifierProfile::masked_contrastive(10));
  const auto pool = simulate_corpus(idx, dist, 1, {}, 7);
  const Scorer scorer(idx, {});
  const Retriever r(scorer);
  BeamOptions bopt;
  bopt.beam_width = 10;
  std::size_t done = 0;
  t0 = Clock::now();
  for (std::size_t q = 0; q < 1000 && !pool.empty(); ++q) {
    KeywordSequence seq = pool[q % pool.size()];
    seq.sets.resize(7);
    done += !r.beam_search(seq, bopt).ranked.empty();
  }
  const double retrieval_s = seconds_since(t0);
  const bool pass = index_s < 2.0 && done == 1000 && retrieval_s < 10.0 && rate >= 100000;
  return {pass, fmt("index 10k sentences %.3f s; %zu BSR retrievals (L=7, k=10, m=10) %.2f s; automaton %.0f "
                    "patterns/s",
                    index_s, done, retrieval_s, rate)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"beam-exhaustive equivalence", 10, c1_beam_exhaustive},
      {"automaton vs naive scan", 5, c2_automaton_oracle},
      {"simulator calibration", 30, c3_simulator_calibration},
      {"oracle ceiling", 0, c4_oracle_ceiling},
      {"scorer ordering and sentence length", 120, c5_directional_scorers},
      {"keyword-set count trend", 0, c6_keyword_set_count_trend},
      {"loss numerics", 5, c7_loss_numerics},
      {"training smoke test", 0, c8_training_smoke},
      {"BLEU correctness", 0, c9_bleu},
      {"performance", 0, c10_performance},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(start);
    if (c.budget_s > 0 && secs >= c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failures += !o.pass;
    std::printf("%s  criterion %2zu  %-36s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
