// nonword: command-line front end for the generation pipeline and the
// pilot-study tooling. Streams are newline-delimited UTF-8.

#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "nonword/corpus.hpp"
#include "nonword/errors.hpp"
#include "nonword/filter.hpp"
#include "nonword/generator.hpp"
#include "nonword/lm.hpp"
#include "nonword/ranker.hpp"
#include "nonword/service.hpp"
#include "nonword/study.hpp"

#ifndef NONWORD_VERSION
#define NONWORD_VERSION "0.0.0"
#endif

namespace {

using namespace nonword;

enum Exit : int { kOk = 0, kUsage = 1, kData = 2, kExhausted = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFormatError("cannot open " + path);
  return in;
}

PositionalNgramModel load_model(const std::string& path) {
  auto in = open_in(path);
  return PositionalNgramModel::deserialize(in);
}

Lexicon load_lexicon_files(const std::string& words, const std::string& exclusions) {
  auto w = open_in(words);
  if (exclusions.empty()) return load_lexicon(w);
  auto e = open_in(exclusions);
  return load_lexicon(w, e);
}

std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> corpus;
  std::vector<std::string> wordlist;
  std::string transliterate;
  std::string alphabet;
  int order = 4;
  std::string out;
};

int run_train(const TrainArgs& a) {
  if (a.corpus.empty() && a.wordlist.empty()) throw UsageError("train needs --corpus or --wordlist");
  const Alphabet alphabet = a.alphabet.empty() ? Alphabet::swedish() : Alphabet::from_utf8(a.alphabet);
  std::optional<TransliterationTable> table;
  if (a.transliterate == "ar") {
    table = TransliterationTable::arabic_default();
  } else if (!a.transliterate.empty()) {
    auto in = open_in(a.transliterate);
    table = TransliterationTable::parse(in);
  }

  WordFrequencyTable counts(alphabet);
  for (const auto& path : a.corpus) {
    std::stringstream text;
    if (path == "-") {
      text << std::cin.rdbuf();
    } else {
      text << open_in(path).rdbuf();
    }
    if (table) {
      std::istringstream raw(text.str());
      std::ostringstream latin;
      transliterate(raw, latin, *table);
      std::istringstream converted(latin.str());
      counts.merge(extract_words(converted, alphabet));
    } else {
      counts.merge(extract_words(text, alphabet));
    }
  }
  for (const auto& path : a.wordlist) {
    auto in = open_in(path);
    counts.merge(table ? load_word_counts(in, alphabet, *table) : load_word_counts(in, alphabet));
  }
  const auto model = PositionalNgramModel::train(counts, a.order);
  if (a.out.empty() || a.out == "-") {
    model.serialize(std::cout);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    model.serialize(out);
    if (!out) throw Error("cannot write " + a.out);
  }
  std::cerr << "types=" << counts.size() << " tokens=" << counts.total_tokens()
            << " contexts=" << model.context_count() << '\n';
  return kOk;
}

// --- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string model;
  std::string alphabet;
  std::size_t length = 6;
  std::size_t count = 20;
  std::optional<std::uint64_t> seed;
  bool exhaustive = false;
  unsigned workers = 1;
};

int run_generate(const GenerateArgs& a, bool require_seed) {
  if (a.exhaustive) {
    if (a.length > kMaxExhaustiveLength) throw UsageError("--exhaustive covers lengths 2-5; sample longer words");
    std::optional<Alphabet> alphabet;
    if (!a.alphabet.empty()) {
      alphabet = Alphabet::from_utf8(a.alphabet);
    } else if (!a.model.empty()) {
      alphabet = load_model(a.model).alphabet();
    } else {
      alphabet = Alphabet::swedish();
    }
    std::string buffer;
    for (const auto& word : exhaustive(*alphabet, a.length)) {
      buffer += word;
      buffer += '\n';
      if (buffer.size() > (1u << 16)) {
        std::cout << buffer;
        buffer.clear();
      }
    }
    std::cout << buffer;
    return kOk;
  }
  if (a.model.empty()) throw UsageError("sampling needs --model");
  if (!a.seed && require_seed) throw UsageError("--seed is required (--require-seed)");
  if (a.length < kMinSampledLength || a.length > kMaxLength) {
    throw UsageError("sampled lengths are 6-11; use --exhaustive for 2-5");
  }
  std::uint64_t seed = 0;
  if (a.seed) {
    seed = *a.seed;
  } else {
    seed = std::random_device{}();
    std::cerr << "seed=" << seed << '\n';
  }
  const auto model = load_model(a.model);
  for (const auto& c : sample_batch_sharded(model, a.length, a.count, seed, a.workers)) std::cout << c.text << '\n';
  return kOk;
}

// --- filter ----------------------------------------------------------------

struct FilterArgs {
  std::string lexicon;
  std::string exclusions;
  std::string model;
  std::optional<double> min_logprob;
};

int run_filter(const FilterArgs& a) {
  if (a.min_logprob && a.model.empty()) throw UsageError("--min-logprob needs --model");
  const Lexicon lexicon = load_lexicon_files(a.lexicon, a.exclusions);
  std::optional<PositionalNgramModel> model;
  if (!a.model.empty()) model = load_model(a.model);

  LexiconFilter by_lexicon(lexicon);
  FilterReport low;
  std::map<std::size_t, LowProbabilityFilter> by_length;  // one threshold per length
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || !by_lexicon.keep(line)) continue;
    ++low.input_count;
    const std::size_t length = utf8::decode(line).size();
    if (model && length <= kMaxExhaustiveLength) {
      auto it = by_length.find(length);
      if (it == by_length.end()) {
        const double t = a.min_logprob ? *a.min_logprob : default_threshold(*model, lexicon, length);
        it = by_length.emplace(length, LowProbabilityFilter(*model, t)).first;
      }
      if (!it->second.keep(line)) continue;
    }
    ++low.output_count;
    std::cout << line << '\n';
  }
  for (const auto& [_, f] : by_length) {
    low.removed_low_probability += f.report().removed_low_probability;
    low.unscorable += f.report().unscorable;
  }
  std::cerr << by_lexicon.report().then(low).to_key_values();
  return kOk;
}

// --- rank ------------------------------------------------------------------

struct RankArgs {
  std::string model;
  std::string rerank;
  std::optional<std::size_t> top;
};

int run_rank(const RankArgs& a) {
  const auto model = load_model(a.model);
  std::vector<Candidate> candidates;
  std::set<std::string> seen;
  for (auto& text : read_lines(std::cin)) {
    if (seen.insert(text).second) candidates.push_back(Candidate::make(std::move(text), Provenance::Sampled));
  }
  RankedList ranked = rank(std::move(candidates), model, "base");
  if (!a.rerank.empty()) ranked = rerank(ranked, load_model(a.rerank), "rerank");
  const std::size_t n = a.top ? std::min(*a.top, ranked.size()) : ranked.size();
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < n; ++i) out << i + 1 << '\t' << ranked.items[i].text << '\t' << ranked.score_at(i) << '\n';
  std::cout << out.str();
  return kOk;
}

// --- study-build -----------------------------------------------------------

struct StudyBuildArgs {
  std::string design;
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
};

int run_study_build(const StudyBuildArgs& a, bool require_seed) {
  const auto design = parse_design(a.design);
  if (!design) throw UsageError("--design must be perception or decision");
  std::vector<TaggedList> lists;
  std::vector<std::string> fillers;
  bool have_fillers = false;
  for (const auto& spec : a.inputs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--inputs takes TAG=PATH, got '" + spec + "'");
    auto in = open_in(spec.substr(eq + 1));
    auto texts = read_lines(in);
    if (spec.substr(0, eq) == kFillerTag) {
      fillers = std::move(texts);
      have_fillers = true;
    } else {
      lists.push_back({spec.substr(0, eq), std::move(texts)});
    }
  }
  StudyList list;
  if (*design == StudyDesign::Perception) {
    if (lists.size() != 3 || have_fillers) throw UsageError("perception needs exactly three non-filler inputs");
    list = build_perception_list(lists[0].texts, lists[1].texts, lists[2].texts);
    list.seed = a.seed;
  } else {
    if (!have_fillers) throw UsageError("decision needs a FI=PATH filler input");
    if (!a.seed && require_seed) throw UsageError("--seed is required (--require-seed)");
    const std::uint64_t seed = a.seed ? *a.seed : std::random_device{}();
    Rng rng(seed);
    list = build_decision_blocks(lists, fillers, rng);
    list.seed = seed;
  }
  std::cout << to_json(list).dump(2) << '\n';
  return kOk;
}

// --- study-analyze ---------------------------------------------------------

struct AnalyzeArgs {
  std::string trials;
  std::string proficiency;
  bool json = false;
};

int run_study_analyze(const AnalyzeArgs& a) {
  std::vector<TrialRecord> records;
  if (a.trials == "-") {
    records = read_trials_csv(std::cin);
  } else {
    auto in = open_in(a.trials);
    records = read_trials_csv(in);
  }
  if (!a.proficiency.empty()) {
    std::set<Proficiency> allowed;
    std::stringstream codes(a.proficiency);
    std::string code;
    while (std::getline(codes, code, ',')) {
      const auto p = parse_proficiency(code);
      if (!p) throw UsageError("unknown proficiency '" + code + "' (use B, I, A)");
      allowed.insert(*p);
    }
    records = filter_by_proficiency(records, allowed);
  }
  const auto analysis = analyze(records);
  if (a.json) {
    std::cout << to_json(analysis).dump(2) << '\n';
  } else {
    write_analysis_csv(std::cout, analysis);
  }
  return kOk;
}

// --- serve -----------------------------------------------------------------

httplib::Server* g_server = nullptr;

int run_serve(const std::string& config_path) {
  const auto config = ServiceConfig::load(config_path);
  JournalSessionStore store(config.store_path);
  Service service(config, store);
  httplib::Server server;
  service.mount(server);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  if (!server.bind_to_port(config.host, config.port)) {
    throw Error("cannot bind " + config.host + ":" + std::to_string(config.port));
  }
  std::cerr << "listening on " << config.host << ':' << config.port << '\n';
  server.listen_after_bind();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-word generation and pilot-study tooling"};
  app.set_version_flag("--version", std::string(NONWORD_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  bool require_seed = false;
  app.add_flag("--require-seed", require_seed, "Fail when a randomized step is not given --seed");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a position-aware n-gram model");
  train_cmd->add_option("--corpus", train.corpus, "Plain-text corpus files ('-' for stdin)");
  train_cmd->add_option("--wordlist", train.wordlist, "word<TAB>count frequency lists");
  train_cmd->add_option("--transliterate", train.transliterate, "Transliteration table file, or 'ar' for the built-in one");
  train_cmd->add_option("--alphabet", train.alphabet, "Model alphabet (default: Swedish a-z, å, ä, ö)");
  train_cmd->add_option("--order", train.order, "n-gram order")->capture_default_str()->check(CLI::Range(2, 8));
  train_cmd->add_option("--out", train.out, "Model file ('-' for stdout)")->required();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate candidate strings");
  gen_cmd->add_option("--model", gen.model, "Model file");
  gen_cmd->add_option("--length", gen.length, "Word length")->capture_default_str()->check(CLI::Range(2, 11));
  gen_cmd->add_option("--count", gen.count, "Words to sample")->capture_default_str()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_flag("--exhaustive", gen.exhaustive, "Enumerate every string over the alphabet (lengths 2-5)");
  gen_cmd->add_option("--alphabet", gen.alphabet, "Alphabet for --exhaustive when no model is given");
  gen_cmd->add_option("--workers", gen.workers, "Sampling threads")->capture_default_str()->check(CLI::Range(1, 256));

  FilterArgs filt;
  auto* filt_cmd = app.add_subcommand("filter", "Drop existing words (and improbable short strings) from stdin");
  filt_cmd->add_option("--lexicon", filt.lexicon, "Lexicon word list")->required();
  filt_cmd->add_option("--exclusions", filt.exclusions, "Exclusion list (names, abbreviations)");
  filt_cmd->add_option("--model", filt.model, "Model for the low-probability filter (lengths 2-5)");
  filt_cmd->add_option("--min-logprob", filt.min_logprob,
                       "Per-character log-likelihood threshold (default: 5th percentile of lexicon words)");

  RankArgs rk;
  auto* rank_cmd = app.add_subcommand("rank", "Rank stdin candidates by model score");
  rank_cmd->add_option("--model", rk.model, "Ranking model")->required();
  rank_cmd->add_option("--rerank", rk.rerank, "Re-rank by this model");
  rank_cmd->add_option("--top", rk.top, "Keep the top K")->check(CLI::PositiveNumber);

  StudyBuildArgs sb;
  auto* sb_cmd = app.add_subcommand("study-build", "Build a pilot-study presentation list");
  sb_cmd->add_option("--design", sb.design, "perception or decision")->required();
  sb_cmd->add_option("--inputs", sb.inputs, "TAG=PATH word lists; FI=PATH gives fillers")->required();
  sb_cmd->add_option("--seed", sb.seed, "Random seed");

  AnalyzeArgs an;
  auto* an_cmd = app.add_subcommand("study-analyze", "Reaction-time and accuracy tables from a trial log");
  an_cmd->add_option("--trials", an.trials, "Trial log CSV ('-' for stdin)")->required();
  an_cmd->add_option("--proficiency", an.proficiency, "Keep only these proficiency codes, e.g. I,A");
  an_cmd->add_flag("--json", an.json, "Emit JSON instead of CSV");

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the REST API");
  serve_cmd->add_option("--config", config_path, "Service config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return run_train(train);
    if (*gen_cmd) return run_generate(gen, require_seed);
    if (*filt_cmd) return run_filter(filt);
    if (*rank_cmd) return run_rank(rk);
    if (*sb_cmd) return run_study_build(sb, require_seed);
    if (*an_cmd) return run_study_analyze(an);
    if (*serve_cmd) return run_serve(config_path);
  } catch (const UsageError& e) {
    std::cerr << "nonword: " << e.what() << '\n';
    return kUsage;
  } catch (const PartialResultError& e) {
    for (const auto& w : e.generated()) std::cout << w << '\n';
    std::cerr << "nonword: " << e.what() << '\n';
    return kExhausted;
  } catch (const GenerationExhausted& e) {
    std::cerr << "nonword: " << e.what() << '\n';
    return kExhausted;
  } catch (const std::exception& e) {
    std::cerr << "nonword: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
