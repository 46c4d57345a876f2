// ksr: command-line front end for indexing, keyword-set simulation,
// retrieval, evaluation and benchmarking.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ksr/aho_corasick.hpp"
#include "ksr/error.hpp"
#include "ksr/io.hpp"
#include "ksr/pipeline.hpp"
#include "ksr/representation.hpp"
#include "ksr/synthetic.hpp"

namespace {

using namespace ksr;
using nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "' for reading");
  return in;
}

// "-" writes to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path == "-") return;
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw ConfigError("cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

// Prefixes errors with the stage that raised them, keeping the category.
template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const InvariantError& e) {
    throw InvariantError(std::string(name) + ": " + e.what());
  }
}

struct CorpusFlags {
  std::string corpus;
  std::string dictionary;
  std::string stopwords;
  std::string index;
  std::size_t vocab = 100;

  void add_source(CLI::App* cmd, bool allow_index) {
    auto* c = cmd->add_option("--corpus", corpus, "Corpus JSON Lines file ({\"id\", \"text\"} per line)")
                  ->check(CLI::ExistingFile);
    cmd->add_option("--dict", dictionary, "Lemma dictionary TSV (surface<TAB>lemma); identity if omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--stopwords", stopwords, "Stopword list, one per line; built-in English list if omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--vocab,-V", vocab, "Vocabulary size V (most frequent lemmas kept)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    if (allow_index) {
      auto* i = cmd->add_option("--index", index, "Index file written by 'ksr index' (instead of --corpus)")
                    ->check(CLI::ExistingFile);
      c->excludes(i);
      i->excludes(c);
    } else {
      c->required();
    }
  }

  CorpusIndex load(std::vector<std::string>* warnings) const {
    if (!index.empty()) {
      auto in = open_in(index);
      return stage("index", [&] { return io::read_index(in); });
    }
    if (corpus.empty()) throw ConfigError("either --corpus or --index is required");
    LemmaDictionary dict;
    if (!dictionary.empty()) {
      auto in = open_in(dictionary);
      dict = stage("dictionary", [&] { return LemmaDictionary::load_tsv(in); });
    }
    StopwordList stop = StopwordList::english_default();
    if (!stopwords.empty()) {
      auto in = open_in(stopwords);
      stop = StopwordList::load(in);
    }
    auto in = open_in(corpus);
    const auto raw = stage("corpus", [&] { return io::read_corpus_jsonl(in); });
    return stage("index", [&] { return index_corpus(raw, dict, stop, vocab, warnings); });
  }
};

struct ProfileFlags {
  std::string profile;
  std::size_t k = 10;
  std::string distractors = "uniform";
  std::string similarity;

  void add(CLI::App* cmd) {
    cmd->add_option("--profile", profile,
                    "Classifier profile JSON ({\"k\": cumulative top-k accuracy}); built-in masked-contrastive "
                    "curve if omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--k", k, "Keyword set size k (must not exceed V)")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--distractors", distractors, "Distractor sampling: uniform, frequency or semantic")
        ->capture_default_str()
        ->check(CLI::IsMember({"uniform", "frequency", "semantic"}));
    cmd->add_option("--similarity", similarity, "Neighbour table JSON for --distractors semantic")
        ->check(CLI::ExistingFile);
  }

  void validate(std::size_t vocab) const {
    if (k > vocab) {
      throw ConfigError("k = " + std::to_string(k) + " exceeds the vocabulary size V = " + std::to_string(vocab));
    }
    if (distractors == "semantic" && similarity.empty()) throw ConfigError("--distractors semantic needs --similarity");
  }

  ClassifierProfile load(std::size_t vocab) const {
    if (profile.empty()) {
      auto p = ClassifierProfile::masked_contrastive(k);
      p.vocabulary_size = vocab;
      return p;
    }
    auto in = open_in(profile);
    return io::read_profile(in, k, vocab);
  }

  DistractorOptions load_distractors() const {
    DistractorOptions opt;
    opt.mode = parse_distractor_mode(distractors);
    if (!similarity.empty()) {
      auto in = open_in(similarity);
      opt.neighbours = io::read_similarity_table(in);
    }
    return opt;
  }
};

struct ScorerFlags {
  std::string scorer = "ac";
  std::size_t m_score = 5;
  std::string count_mode = "multiplicity";
  std::size_t beam = 10;
  std::size_t k_used = 0;
  std::size_t max_results = 10;
  std::string strategy = "beam";

  void add(CLI::App* cmd, bool many_scorers) {
    if (many_scorers) {
      cmd->add_option("--scorer", scorer, "Comma-separated scoring methods: ac, ld, tfidf")->capture_default_str();
    } else {
      cmd->add_option("--scorer", scorer, "Scoring method: ac (Aho-Corasick), ld (Levenshtein) or tfidf")
          ->capture_default_str()
          ->check(CLI::IsMember({"ac", "ld", "tfidf"}));
    }
    cmd->add_option("--m-score", m_score, "Sentences averaged into the relevance score H")->capture_default_str();
    cmd->add_option("--count-mode", count_mode, "Keyword counting: multiplicity or distinct")
        ->capture_default_str()
        ->check(CLI::IsMember({"multiplicity", "distinct"}));
    cmd->add_option("--beam,-m", beam, "Beam width m")->capture_default_str();
    cmd->add_option("--k-used", k_used, "Candidates per set expanded by beam search (0 = all)")->capture_default_str();
    cmd->add_option("--max-results", max_results, "Ranked sentences returned per query")->capture_default_str();
    cmd->add_option("--strategy", strategy, "beam (beam search) or greedy (top-1 of every set)")
        ->capture_default_str()
        ->check(CLI::IsMember({"beam", "greedy"}));
  }

  void validate() const {
    if (m_score < 1) throw ConfigError("--m-score must be at least 1");
    if (beam < 1) throw ConfigError("--beam must be at least 1");
    if (max_results < 1) throw ConfigError("--max-results must be at least 1");
    (void)scorers();  // throws on unknown names
  }

  std::vector<ScorerKind> scorers() const {
    std::vector<ScorerKind> out;
    std::stringstream ss(scorer);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item == "ac") {
        out.push_back(ScorerKind::aho_corasick);
      } else if (item == "ld") {
        out.push_back(ScorerKind::levenshtein);
      } else if (item == "tfidf") {
        out.push_back(ScorerKind::tfidf);
      } else {
        throw ConfigError("unknown scorer '" + item + "' (expected ac, ld or tfidf)");
      }
    }
    if (out.empty()) throw ConfigError("--scorer is empty");
    return out;
  }

  BeamOptions beam_options() const {
    BeamOptions b;
    b.beam_width = beam;
    if (k_used > 0) b.k_used = k_used;
    b.max_results = max_results;
    return b;
  }

  Strategy parsed_strategy() const { return strategy == "greedy" ? Strategy::greedy : Strategy::beam; }
};

std::vector<std::size_t> parse_strata(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoul(item, &pos);
      if (pos != item.size() || v < 1) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw ConfigError("bad stratum '" + item + "' in --strata");
    }
  }
  if (out.empty()) throw ConfigError("--strata is empty");
  return out;
}

ordered_json strata_json(const std::vector<StratumMetrics>& strata) {
  ordered_json rows = ordered_json::array();
  for (const auto& s : strata) {
    rows.push_back({{"min_sets", s.min_sets},
                    {"queries", s.queries},
                    {"recall", s.recall},
                    {"precision", s.precision},
                    {"bleu1", s.bleu1},
                    {"bleu4", s.bleu4}});
  }
  return rows;
}

void print_strata_table(std::ostream& out, const std::string& label, const std::vector<StratumMetrics>& strata) {
  char line[160];
  for (const auto& s : strata) {
    std::snprintf(line, sizeof line, "%-8s T>=%-3zu %7zu   %8.2f%%  %10.2f%%  %7.2f%%  %7.2f%%\n", label.c_str(),
                  s.min_sets, s.queries, 100 * s.recall, 100 * s.precision, 100 * s.bleu1, 100 * s.bleu4);
    out << line;
  }
}

void print_strata_header(std::ostream& out, std::size_t n) {
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-6s %7s   %9s  %11s  %8s  %8s\n", "scorer", "subset", "queries",
                ("Recall@" + std::to_string(n)).c_str(), ("Precision@" + std::to_string(n)).c_str(), "BLEU-1",
                "BLEU-4");
  out << line;
}

void write_outcomes_tsv(std::ostream& out, const std::vector<QueryOutcome>& outcomes, const std::string& scorer) {
  out << "sentence_id\tscorer\tnum_sets\trecall\tprecision\tbleu1\tbleu4\ttop_id\n";
  char buf[64];
  for (const auto& o : outcomes) {
    out << o.sentence_id << '\t' << scorer << '\t' << o.num_sets << '\t' << o.recall << '\t';
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%.6f", o.precision, o.bleu1, o.bleu4);
    out << buf << '\t' << o.top_id << '\n';
  }
}

double percentile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Keyword-set sentence retrieval: index a corpus, simulate noisy keyword sets, retrieve and evaluate."};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // index
  CorpusFlags index_corpus_flags;
  std::string index_out;
  auto* index_cmd = app.add_subcommand("index", "Preprocess a corpus and write a checksummed index file");
  index_corpus_flags.add_source(index_cmd, false);
  index_cmd->add_option("--output,-o", index_out, "Index file to write")->required();

  // simulate
  CorpusFlags sim_corpus;
  ProfileFlags sim_profile;
  std::uint64_t sim_seed = 0;
  std::size_t sim_min_sets = 1;
  std::string sim_out = "-";
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate classifier keyword sets for every corpus sentence");
  sim_corpus.add_source(sim_cmd, true);
  sim_profile.add(sim_cmd);
  sim_cmd->add_option("--seed", sim_seed, "Master random seed")->capture_default_str();
  sim_cmd->add_option("--min-sets", sim_min_sets, "Skip sentences with fewer in-vocabulary words")->capture_default_str();
  sim_cmd->add_option("--output,-o", sim_out, "Keyword-set JSON Lines output ('-' = stdout)")->capture_default_str();

  // retrieve
  CorpusFlags ret_corpus;
  ScorerFlags ret_scorer;
  std::string ret_keywords, ret_out = "-";
  auto* ret_cmd = app.add_subcommand("retrieve", "Retrieve sentences for keyword-set sequences");
  ret_corpus.add_source(ret_cmd, true);
  ret_scorer.add(ret_cmd, false);
  ret_cmd->add_option("--keywords", ret_keywords, "Keyword-set JSON Lines (from 'ksr simulate')")
      ->required()
      ->check(CLI::ExistingFile);
  ret_cmd->add_option("--output,-o", ret_out, "Result JSON Lines output ('-' = stdout)")->capture_default_str();

  // evaluate
  CorpusFlags eval_corpus;
  std::string eval_results, eval_out = "-", eval_tsv, eval_strata = "5,7";
  std::size_t eval_n = 5;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score retrieval results against their ground-truth sentences");
  eval_corpus.add_source(eval_cmd, true);
  eval_cmd->add_option("--results", eval_results, "Result JSON Lines (from 'ksr retrieve')")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--n", eval_n, "Cut-off n for recall@n and precision@n")->capture_default_str();
  eval_cmd->add_option("--strata", eval_strata, "Comma-separated minimum keyword-set counts")->capture_default_str();
  eval_cmd->add_option("--output,-o", eval_out, "Metrics JSON output ('-' = stdout)")->capture_default_str();
  eval_cmd->add_option("--tsv", eval_tsv, "Per-query TSV output");

  // pipeline
  CorpusFlags pipe_corpus;
  ProfileFlags pipe_profile;
  ScorerFlags pipe_scorer;
  pipe_scorer.scorer = "ac,ld,tfidf";
  std::uint64_t pipe_seed = 0;
  std::size_t pipe_n = 5;
  std::string pipe_strata = "5,7", pipe_out, pipe_tsv;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Simulate, retrieve and evaluate in one run for each scorer");
  pipe_corpus.add_source(pipe_cmd, true);
  pipe_profile.add(pipe_cmd);
  pipe_scorer.add(pipe_cmd, true);
  pipe_cmd->add_option("--seed", pipe_seed, "Master random seed")->capture_default_str();
  pipe_cmd->add_option("--n", pipe_n, "Cut-off n for recall@n and precision@n")->capture_default_str();
  pipe_cmd->add_option("--strata", pipe_strata, "Comma-separated minimum keyword-set counts; the smallest also "
                                                "selects which sentences are queried")
      ->capture_default_str();
  pipe_cmd->add_option("--output,-o", pipe_out, "Metrics JSON report");
  pipe_cmd->add_option("--tsv", pipe_tsv, "Per-query TSV output");

  // gradcheck
  std::uint64_t gc_seed = 0;
  std::size_t gc_points = 20;
  double gc_tolerance = 1e-5;
  LossHyperparams gc_hp;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Compare analytical loss gradients with central differences");
  gc_cmd->add_option("--seed", gc_seed, "Random seed")->capture_default_str();
  gc_cmd->add_option("--points", gc_points, "Random points per check")->capture_default_str();
  gc_cmd->add_option("--tolerance", gc_tolerance, "Maximum accepted relative error")->capture_default_str();
  gc_cmd->add_option("--temperature,--tau", gc_hp.temperature, "Contrastive temperature")->capture_default_str();
  gc_cmd->add_option("--mask-ratio,--eta", gc_hp.mask_ratio, "Band mask ratio, in [0, 1)")->capture_default_str();
  gc_cmd->add_option("--alpha", gc_hp.alpha, "Contrastive loss weight")->capture_default_str();
  gc_cmd->add_option("--beta", gc_hp.beta, "Supervised loss weight")->capture_default_str();

  // bench
  std::uint64_t bench_seed = 0;
  std::size_t bench_sentences = 10000, bench_queries = 1000, bench_sets = 7, bench_k = 10, bench_beam = 10,
              bench_patterns = 10000, bench_vocab = 100;
  std::string bench_scorer = "ac", bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Time index build, automaton build and retrieval on synthetic data");
  bench_cmd->add_option("--sentences", bench_sentences, "Synthetic corpus size")->capture_default_str();
  bench_cmd->add_option("--queries", bench_queries, "Retrievals to time (0 allowed)")->capture_default_str();
  bench_cmd->add_option("--sets,-L", bench_sets, "Keyword sets per query")->capture_default_str();
  bench_cmd->add_option("--k", bench_k, "Keyword set size")->capture_default_str();
  bench_cmd->add_option("--beam,-m", bench_beam, "Beam width m")->capture_default_str();
  bench_cmd->add_option("--vocab,-V", bench_vocab, "Vocabulary size V")->capture_default_str();
  bench_cmd->add_option("--patterns", bench_patterns, "Automaton patterns for the throughput check")
      ->capture_default_str();
  bench_cmd->add_option("--scorer", bench_scorer, "Scoring method: ac, ld or tfidf")
      ->capture_default_str()
      ->check(CLI::IsMember({"ac", "ld", "tfidf"}));
  bench_cmd->add_option("--seed", bench_seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--output,-o", bench_out, "Timing JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  std::vector<std::string> warnings;
  auto flush_warnings = [&] {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    warnings.clear();
  };

  if (*index_cmd) {
    const auto index = index_corpus_flags.load(&warnings);
    flush_warnings();
    Output out(index_out);
    io::write_index(out.stream(), index);
    std::cerr << "indexed " << index.size() << " sentences, vocabulary " << index.vocabulary().size() << ", "
              << index.term_count() << " distinct lemmas -> " << index_out << '\n';
    return 0;
  }

  if (*sim_cmd) {
    sim_profile.validate(sim_corpus.index.empty() ? sim_corpus.vocab : std::numeric_limits<std::size_t>::max());
    const auto index = sim_corpus.load(&warnings);
    flush_warnings();
    sim_profile.validate(index.vocabulary().size());
    const auto profile = sim_profile.load(index.vocabulary().size());
    const auto distractors = sim_profile.load_distractors();
    const auto seqs = stage("simulate", [&] {
      return simulate_corpus(index, derive_rank_distribution(profile), sim_seed, distractors, sim_min_sets);
    });
    Output out(sim_out);
    io::write_keyword_sets_jsonl(out.stream(), seqs);
    std::cerr << "simulated " << seqs.size() << " keyword-set sequences\n";
    return 0;
  }

  if (*ret_cmd) {
    ret_scorer.validate();
    const auto index = ret_corpus.load(&warnings);
    flush_warnings();
    auto kin = open_in(ret_keywords);
    const auto seqs = stage("keywords", [&] { return io::read_keyword_sets_jsonl(kin); });
    const Scorer scorer(index, {ret_scorer.scorers().front(), ret_scorer.m_score, parse_count_mode(ret_scorer.count_mode)});
    const Retriever retriever(scorer);
    std::vector<RetrievalResult> results;
    results.reserve(seqs.size());
    stage("retrieve", [&] {
      for (const auto& s : seqs) {
        results.push_back(retrieve(retriever, s, ret_scorer.parsed_strategy(), ret_scorer.beam_options()));
      }
      return 0;
    });
    Output out(ret_out);
    io::write_results_jsonl(out.stream(), index, results);
    std::cerr << "retrieved " << results.size() << " queries\n";
    return 0;
  }

  if (*eval_cmd) {
    if (eval_n < 1) throw ConfigError("--n must be at least 1");
    const auto strata = parse_strata(eval_strata);
    const auto index = eval_corpus.load(&warnings);
    flush_warnings();
    auto rin = open_in(eval_results);
    const auto stored = stage("results", [&] { return io::read_results_jsonl(rin); });
    const RelevanceIndex relevance(index);
    std::vector<QueryOutcome> outcomes;
    stage("evaluate", [&] {
      for (const auto& r : stored) outcomes.push_back(judge(index, relevance, r.sentence_id, r.num_sets, r.ranked_ids, eval_n));
      return 0;
    });
    const auto metrics = aggregate(outcomes, strata);
    ordered_json report{{"n", eval_n}, {"queries", outcomes.size()}, {"strata", strata_json(metrics)}};
    {
      Output out(eval_out);
      out.stream() << report.dump(2) << '\n';
    }
    if (!eval_tsv.empty()) {
      Output tsv(eval_tsv);
      write_outcomes_tsv(tsv.stream(), outcomes, "-");
    }
    print_strata_header(std::cerr, eval_n);
    print_strata_table(std::cerr, "-", metrics);
    return 0;
  }

  if (*pipe_cmd) {
    pipe_scorer.validate();
    if (pipe_n < 1) throw ConfigError("--n must be at least 1");
    PipelineConfig config;
    config.scorers = pipe_scorer.scorers();
    config.strata = parse_strata(pipe_strata);
    pipe_profile.validate(pipe_corpus.index.empty() ? pipe_corpus.vocab : std::numeric_limits<std::size_t>::max());
    const auto index = pipe_corpus.load(&warnings);
    flush_warnings();
    pipe_profile.validate(index.vocabulary().size());
    config.profile = pipe_profile.load(index.vocabulary().size());
    config.distractors = pipe_profile.load_distractors();
    config.strategy = pipe_scorer.parsed_strategy();
    config.beam = pipe_scorer.beam_options();
    config.m_score = pipe_scorer.m_score;
    config.count_mode = parse_count_mode(pipe_scorer.count_mode);
    config.seed = pipe_seed;
    config.n = pipe_n;
    const auto report = stage("pipeline", [&] { return run_pipeline(index, config); });

    ordered_json runs = ordered_json::array();
    for (const auto& r : report.runs) {
      runs.push_back({{"scorer", std::string(to_string(r.scorer))}, {"strata", strata_json(r.strata)}});
    }
    ordered_json j{{"corpus_size", report.corpus_size},
                   {"queries", report.simulated},
                   {"seed", pipe_seed},
                   {"k", pipe_profile.k},
                   {"vocabulary", index.vocabulary().size()},
                   {"strategy", pipe_scorer.strategy},
                   {"beam_width", pipe_scorer.beam},
                   {"m_score", pipe_scorer.m_score},
                   {"count_mode", pipe_scorer.count_mode},
                   {"distractors", pipe_profile.distractors},
                   {"n", pipe_n},
                   {"runs", std::move(runs)}};
    if (!pipe_out.empty()) {
      Output out(pipe_out);
      out.stream() << j.dump(2) << '\n';
    }
    if (!pipe_tsv.empty()) {
      Output tsv(pipe_tsv);
      bool first = true;
      for (const auto& r : report.runs) {
        std::ostringstream part;
        write_outcomes_tsv(part, r.outcomes, std::string(to_string(r.scorer)));
        auto text = part.str();
        if (!first) text.erase(0, text.find('\n') + 1);
        tsv.stream() << text;
        first = false;
      }
    }
    std::cout << "corpus " << report.corpus_size << " sentences, " << report.simulated << " queries\n";
    print_strata_header(std::cout, pipe_n);
    for (const auto& r : report.runs) print_strata_table(std::cout, std::string(to_string(r.scorer)), r.strata);
    return 0;
  }

  if (*gc_cmd) {
    if (gc_points < 1) throw ConfigError("--points must be at least 1");
    gc_hp.validate();
    const auto r = run_gradcheck(gc_seed, gc_points, gc_hp);
    ordered_json j{{"points", r.points},
                   {"contrastive_max_rel_error", r.contrastive_max_rel_error},
                   {"supervised_max_rel_error", r.supervised_max_rel_error},
                   {"encoder_max_rel_error", r.encoder_max_rel_error},
                   {"tolerance", gc_tolerance}};
    const double worst =
        std::max({r.contrastive_max_rel_error, r.supervised_max_rel_error, r.encoder_max_rel_error});
    j["pass"] = worst <= gc_tolerance;
    std::cout << j.dump(2) << '\n';
    if (worst > gc_tolerance) throw InvariantError("gradient check failed: max relative error " + std::to_string(worst));
    return 0;
  }

  if (*bench_cmd) {
    if (bench_k > bench_vocab) throw ConfigError("k exceeds the vocabulary size V");
    if (bench_beam < 1 || bench_sets < 1) throw ConfigError("--beam and --sets must be at least 1");
    if (bench_sentences < 1 || bench_patterns < 1) throw ConfigError("--sentences and --patterns must be positive");

    synthetic::CorpusOptions copt;
    copt.sentences = bench_sentences;
    copt.seed = bench_seed + 1;
    const auto corpus = synthetic::generate_corpus(copt);
    const auto stop = StopwordList::english_default();
    auto t0 = Clock::now();
    const auto index = index_corpus(corpus.sentences, corpus.lemmas, stop, bench_vocab);
    const double index_s = seconds_since(t0);

    auto automaton_rate = [&](std::size_t n) {
      std::vector<std::string> patterns;
      patterns.reserve(n);
      for (std::size_t i = 0; i < n; ++i) patterns.push_back(synthetic::pseudo_word(i));
      const auto start = Clock::now();
      const AhoCorasick ac(std::move(patterns));
      const double s = std::max(seconds_since(start), 1e-9);
      return std::pair{static_cast<double>(ac.pattern_count()) / s, s};
    };
    const std::size_t small_patterns = std::max<std::size_t>(1, bench_patterns / 10);
    const auto [small_rate, small_s] = automaton_rate(small_patterns);
    const auto [rate, build_s] = automaton_rate(bench_patterns);

    // Queries: sentences with at least L in-vocabulary lemmas, first L sets.
    const auto dist = derive_rank_distribution(ClassifierProfile::masked_contrastive(bench_k));
    std::vector<KeywordSequence> queries;
    if (bench_queries > 0) {
      auto pool = simulate_corpus(index, dist, bench_seed, {}, bench_sets);
      if (pool.empty()) throw DataError("bench: no sentence has " + std::to_string(bench_sets) + " vocabulary words");
      for (std::size_t q = 0; q < bench_queries; ++q) {
        auto seq = pool[q % pool.size()];
        seq.sets.resize(bench_sets);
        queries.push_back(std::move(seq));
      }
    }
    const Scorer scorer(index, {parse_scorer(bench_scorer), 5, CountMode::multiplicity});
    const Retriever retriever(scorer);
    BeamOptions bopt;
    bopt.beam_width = bench_beam;
    std::vector<double> latencies_ms;
    latencies_ms.reserve(queries.size());
    t0 = Clock::now();
    for (const auto& q : queries) {
      const auto start = Clock::now();
      const auto r = retriever.beam_search(q, bopt);
      latencies_ms.push_back(seconds_since(start) * 1e3);
      if (r.ranked.empty()) throw InvariantError("bench: empty ranking");
    }
    const double retrieval_s = seconds_since(t0);

    ordered_json j{{"sentences", index.size()},
                   {"index_build_s", index_s},
                   {"automaton_patterns", bench_patterns},
                   {"automaton_build_s", build_s},
                   {"automaton_patterns_per_s", rate},
                   {"automaton_small_patterns", small_patterns},
                   {"automaton_small_patterns_per_s", small_rate},
                   {"retrievals", queries.size()},
                   {"retrieval_total_s", retrieval_s},
                   {"latency_p50_ms", percentile(latencies_ms, 0.50)},
                   {"latency_p99_ms", percentile(latencies_ms, 0.99)}};
    if (!bench_out.empty()) {
      Output out(bench_out);
      out.stream() << j.dump(2) << '\n';
    }
    char line[200];
    std::snprintf(line, sizeof line, "index build        %8.3f s   (%zu sentences)\n", index_s, index.size());
    std::cout << line;
    std::snprintf(line, sizeof line, "automaton build    %8.0f patterns/s  (%zu patterns; %.0f/s at %zu)\n", rate,
                  bench_patterns, small_rate, small_patterns);
    std::cout << line;
    if (queries.empty()) {
      std::cout << "retrieval          0 queries\n";
    } else {
      std::snprintf(line, sizeof line, "retrieval          %8.3f s   (%zu queries, L=%zu, k=%zu, m=%zu)\n", retrieval_s,
                    queries.size(), bench_sets, bench_k, bench_beam);
      std::cout << line;
      std::snprintf(line, sizeof line, "latency            p50 %.3f ms   p99 %.3f ms\n", percentile(latencies_ms, 0.5),
                    percentile(latencies_ms, 0.99));
      std::cout << line;
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
