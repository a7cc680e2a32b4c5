// lexrec command-line tool. Talks to the library through the C interface only.

#include <lexrec/lexrec.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoHypothesis = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int code;
  std::string message;
};

void check(lexrec_status status, const std::string& what) {
  if (status == LEXREC_OK) return;
  const int code = status == LEXREC_ERR_NO_HYPOTHESIS ? kExitNoHypothesis : kExitUsage;
  throw Failure{code, what + ": " + lexrec_status_name(status) + ": " + lexrec_last_error()};
}

struct StringDeleter {
  void operator()(char* s) const { lexrec_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct LexiconDeleter {
  void operator()(lexrec_lexicon* p) const { lexrec_lexicon_free(p); }
};
struct LdDeleter {
  void operator()(lexrec_ld* p) const { lexrec_ld_free(p); }
};
struct RecognizerDeleter {
  void operator()(lexrec_recognizer* p) const { lexrec_recognizer_free(p); }
};
struct SessionDeleter {
  void operator()(lexrec_session* p) const { lexrec_session_free(p); }
};

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_true_word(const std::string& v) { return v == "true" || v == "yes" || v == "on"; }
bool is_false_word(const std::string& v) { return v == "false" || v == "no" || v == "off"; }

// `key = value` lines become `--key=value` arguments. Boolean words turn into
// plain flags (or nothing for false).
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{kExitUsage, "cannot open config file '" + path + "'"};
  std::vector<std::string> args;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Failure{kExitUsage, path + ":" + std::to_string(lineno) + ": expected key = value"};
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw Failure{kExitUsage, path + ":" + std::to_string(lineno) + ": empty key"};
    for (char& ch : key) {
      if (ch == '_') ch = '-';
    }
    if (is_true_word(value)) {
      args.push_back("--" + key);
    } else if (!is_false_word(value)) {
      args.push_back("--" + key + "=" + value);
    }
  }
  return args;
}

// Pulls `--config FILE` / `--config=FILE` out of argv and splices the file's
// arguments in right after the subcommand name, so explicit flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> config;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw Failure{kExitUsage, "--config needs a file"};
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!config) return rest;
  const auto extra = read_config(*config);
  std::size_t at = 0;
  while (at < rest.size() && rest[at].rfind("-", 0) == 0) ++at;
  if (at < rest.size()) ++at;  // after the subcommand
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
  return rest;
}

unsigned parse_functions(const std::string& spec) {
  unsigned mask = 0;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "all") {
      mask |= 0x3f;
    } else if (item == "del") {
      mask |= LEXREC_FN_DELETION;
    } else if (item == "ins") {
      mask |= LEXREC_FN_INSERTION;
    } else if (item == "sub") {
      mask |= LEXREC_FN_SUBSTITUTION;
    } else if (item == "tra") {
      mask |= LEXREC_FN_TRANSPOSITION;
    } else if (item == "space") {
      mask |= LEXREC_FN_SPACE_INSERTION;
    } else if (item == "double") {
      mask |= LEXREC_FN_DOUBLE_STROKE;
    } else {
      throw Failure{kExitUsage, "unknown error function '" + item + "'"};
    }
  }
  if (mask == 0) throw Failure{kExitUsage, "no error functions selected"};
  return mask;
}

const char* c_or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Output sink: a file or stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw Failure{kExitUsage, "cannot write '" + path + "'"};
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

class Input {
 public:
  explicit Input(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw Failure{kExitUsage, "cannot read '" + path + "'"};
    }
  }
  std::istream& stream() { return file_.is_open() ? static_cast<std::istream&>(file_) : std::cin; }

 private:
  std::ifstream file_;
};

// ---------------------------------------------------------------------------

struct TrainOdArgs {
  std::string lexicon;
  std::string out;
  bool with_transpositions = false;
  std::string functions;
  bool no_filter = false;
  bool no_space_state = false;
  unsigned delta = 2;
  double eps_obs = 1e-4;
  std::string keyboard;
  unsigned max_iters = 100;
  double conv_eps = 1e-6;
  unsigned long seed = 0;
};

int run_train_od(const TrainOdArgs& a) {
  lexrec_od_options opts;
  lexrec_od_options_init(&opts);
  opts.with_space_state = a.no_space_state ? 0 : 1;
  opts.delta = a.delta;
  opts.eps_obs = a.eps_obs;
  if (!a.functions.empty()) opts.error_functions = parse_functions(a.functions);
  if (a.with_transpositions) opts.error_functions |= LEXREC_FN_TRANSPOSITION;
  opts.filter_real_words = a.no_filter ? 0 : 1;
  opts.max_iters = a.max_iters;
  opts.conv_eps = a.conv_eps;
  opts.keyboard_path = c_or_null(a.keyboard);

  lexrec_lexicon* raw = nullptr;
  check(lexrec_lexicon_train(a.lexicon.c_str(), &opts, &raw), "training word models");
  std::unique_ptr<lexrec_lexicon, LexiconDeleter> lexicon(raw);
  check(lexrec_lexicon_save(lexicon.get(), a.out.c_str()), "saving word models");
  std::cerr << "trained " << lexrec_lexicon_size(lexicon.get()) << " word models into " << a.out << '\n';
  return kExitOk;
}

struct TrainLdArgs {
  std::string kind;
  std::string corpus;
  bool tagged = false;
  bool untagged = false;
  std::string tagset;
  std::string vocab;
  std::string out;
  double eps_obs = -1.0;
  double eps_trans = -1.0;
  unsigned max_iters = 100;
  double conv_eps = 1e-6;
  unsigned long seed = 0;
};

int run_train_ld(const TrainLdArgs& a) {
  lexrec_ld_options opts;
  lexrec_ld_options_init(&opts);
  if (a.kind == "baseline") {
    opts.kind = LEXREC_LD_BASELINE;
  } else if (a.kind == "unigram") {
    opts.kind = LEXREC_LD_UNIGRAM;
  } else if (a.kind == "bigram") {
    opts.kind = LEXREC_LD_BIGRAM;
    if (a.tagset.empty()) throw Failure{kExitUsage, "bigram model needs --tagset"};
  } else {
    throw Failure{kExitUsage, "unknown language model kind '" + a.kind + "'"};
  }
  if (a.tagged && a.untagged) throw Failure{kExitUsage, "--tagged and --untagged are exclusive"};
  opts.corpus_path = c_or_null(a.corpus);
  opts.tagged = a.tagged ? 1 : 0;
  opts.tagset_path = c_or_null(a.tagset);
  opts.vocabulary_path = c_or_null(a.vocab);
  opts.eps_obs = a.eps_obs;
  opts.eps_trans = a.eps_trans;
  opts.max_iters = a.max_iters;
  opts.conv_eps = a.conv_eps;

  lexrec_ld* raw = nullptr;
  check(lexrec_ld_train(&opts, &raw), "training language model");
  std::unique_ptr<lexrec_ld, LdDeleter> ld(raw);
  check(lexrec_ld_save(ld.get(), a.out.c_str()), "saving language model");
  return kExitOk;
}

struct CorrectArgs {
  std::string models;
  std::string ld;
  double beam = -1.0;
  std::size_t n_best = 0;
  bool incremental = false;
  bool tags = false;
  std::string input;
  std::string output;
};

std::unique_ptr<lexrec_recognizer, RecognizerDeleter> make_recognizer(const CorrectArgs& a) {
  lexrec_lexicon* lex_raw = nullptr;
  check(lexrec_lexicon_load(a.models.c_str(), &lex_raw), "loading word models");
  std::unique_ptr<lexrec_lexicon, LexiconDeleter> lexicon(lex_raw);

  lexrec_ld* ld_raw = nullptr;
  if (a.ld.empty() || a.ld == "baseline") {
    lexrec_ld_options opts;
    lexrec_ld_options_init(&opts);
    check(lexrec_ld_train(&opts, &ld_raw), "building baseline language model");
  } else {
    check(lexrec_ld_load(a.ld.c_str(), &ld_raw), "loading language model");
  }
  std::unique_ptr<lexrec_ld, LdDeleter> ld(ld_raw);

  lexrec_recognizer_options opts;
  lexrec_recognizer_options_init(&opts);
  opts.beam = a.beam;
  opts.n_best = a.n_best;
  lexrec_recognizer* rec = nullptr;
  check(lexrec_recognizer_create(lexicon.get(), ld.get(), &opts, &rec), "creating recognizer");
  return std::unique_ptr<lexrec_recognizer, RecognizerDeleter>(rec);
}

// Writes the correction of one line, or echoes it when there is none.
// Returns false on a no-hypothesis line.
bool emit(std::ostream& out, const std::string& line, lexrec_status status, char* corrected,
          std::size_t lineno) {
  OwnedString owned(corrected);
  if (status == LEXREC_OK) {
    out << owned.get() << '\n';
    return true;
  }
  if (status != LEXREC_ERR_NO_HYPOTHESIS) check(status, "line " + std::to_string(lineno));
  std::cerr << "warning: line " << lineno << ": no hypothesis, echoed unchanged\n";
  out << line << '\n';
  return false;
}

int run_correct(const CorrectArgs& a) {
  auto recognizer = make_recognizer(a);
  Input input(a.input);
  Output output(a.output);
  std::istream& in = input.stream();
  std::ostream& out = output.stream();
  bool all_found = true;
  std::size_t lineno = 0;

  if (!a.incremental) {
    std::string line;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) {
        out << '\n';
        continue;
      }
      char* corrected = nullptr;
      double cost = 0.0;
      const lexrec_status st = lexrec_correct(recognizer.get(), line.c_str(), a.tags, &corrected, &cost);
      all_found = emit(out, line, st, corrected, lineno) && all_found;
    }
  } else {
    std::unique_ptr<lexrec_session, SessionDeleter> session;
    std::string line;  // echo buffer
    bool pending_cr = false;
    auto feed = [&](char ch) {
      if (!session) {
        lexrec_session* s = nullptr;
        check(lexrec_session_create(recognizer.get(), &s), "starting session");
        session.reset(s);
      }
      line.push_back(ch);
      check(lexrec_session_feed(session.get(), &ch, 1), "line " + std::to_string(lineno + 1));
    };
    auto flush = [&] {
      ++lineno;
      if (!session) {
        out << '\n';
      } else {
        char* corrected = nullptr;
        double cost = 0.0;
        const lexrec_status st = lexrec_session_finalize(session.get(), a.tags, &corrected, &cost);
        all_found = emit(out, line, st, corrected, lineno) && all_found;
        session.reset();
      }
      out.flush();
      line.clear();
    };
    bool open_line = false;
    char ch = 0;
    while (in.get(ch)) {
      if (ch == '\n') {
        pending_cr = false;
        flush();
        open_line = false;
        continue;
      }
      if (pending_cr) {
        feed('\r');
        pending_cr = false;
      }
      open_line = true;
      if (ch == '\r') {
        pending_cr = true;
      } else {
        feed(ch);
      }
    }
    if (open_line) flush();
  }
  out.flush();
  return all_found ? kExitOk : kExitNoHypothesis;
}

struct EvaluateArgs {
  std::string key;
  std::string run;
  std::string lexicon;
  std::string format = "text";
  std::string output;
};

int run_evaluate(const EvaluateArgs& a) {
  lexrec_report_format format = LEXREC_REPORT_TEXT;
  if (a.format == "tsv") {
    format = LEXREC_REPORT_TSV;
  } else if (a.format != "text") {
    throw Failure{kExitUsage, "unknown report format '" + a.format + "'"};
  }
  char* report = nullptr;
  int consistent = 0;
  check(lexrec_evaluate_files(a.key.c_str(), a.run.c_str(), c_or_null(a.lexicon), format, &report,
                              &consistent),
        "evaluating");
  OwnedString owned(report);
  Output output(a.output);
  output.stream() << owned.get();
  if (!consistent) std::cerr << "warning: report failed its consistency checks\n";
  return kExitOk;
}

struct GenErrorsArgs {
  std::string word;
  std::string functions = "all";
  std::string keyboard;
  bool full_alphabet = false;
};

int run_gen_errors(const GenErrorsArgs& a) {
  char* dump = nullptr;
  check(lexrec_generate_errors(a.word.c_str(), parse_functions(a.functions), c_or_null(a.keyboard),
                               a.full_alphabet ? 1 : 0, &dump),
        "generating errors");
  OwnedString owned(dump);
  std::cout << owned.get();
  return kExitOk;
}

struct IsolatedArgs {
  std::string models;
  double beam = -1.0;
  std::string input;
};

int run_isolated(const IsolatedArgs& a) {
  lexrec_lexicon* raw = nullptr;
  check(lexrec_lexicon_load(a.models.c_str(), &raw), "loading word models");
  std::unique_ptr<lexrec_lexicon, LexiconDeleter> lexicon(raw);
  Input input(a.input);
  std::string line;
  bool all_found = true;
  std::size_t lineno = 0;
  while (std::getline(input.stream(), line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    char* word = nullptr;
    double cost = 0.0;
    const lexrec_status st = lexrec_lexicon_best_word(lexicon.get(), line.c_str(), a.beam, &word, &cost);
    OwnedString owned(word);
    if (st == LEXREC_OK) {
      std::cout << owned.get() << '\t' << cost << '\n';
    } else if (st == LEXREC_ERR_NO_HYPOTHESIS || st == LEXREC_ERR_INPUT) {
      std::cerr << "warning: line " << lineno << ": " << lexrec_last_error() << '\n';
      std::cout << line << "\t-\n";
      all_found = false;
    } else {
      check(st, "line " + std::to_string(lineno));
    }
  }
  return all_found ? kExitOk : kExitNoHypothesis;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lexical error correction with hidden Markov models"};
  app.set_version_flag("--version", lexrec_version());
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  // Placeholder so --config shows up in help; it is handled before parsing.
  std::string config_path;
  app.add_option("--config", config_path, "File of key = value lines applied before other flags");

  TrainOdArgs od;
  auto* train_od = app.add_subcommand("train-od", "Train word models from a lexicon");
  train_od->add_option("--lexicon", od.lexicon, "Lexicon file, one word per line")->required();
  train_od->add_option("--out", od.out, "Output directory")->required();
  train_od->add_flag("--with-transpositions", od.with_transpositions, "Also train on transpositions");
  train_od->add_option("--functions", od.functions, "Error functions: del,ins,sub,tra,space,double or all");
  train_od->add_flag("--no-filter", od.no_filter, "Keep corruptions that are real words");
  train_od->add_flag("--no-space-state", od.no_space_state, "Isolated-word models without the space state");
  train_od->add_option("--delta", od.delta, "Largest forward skip")->check(CLI::Range(1u, 64u));
  train_od->add_option("--eps-obs", od.eps_obs, "Observation smoothing floor")->check(CLI::Range(0.0, 1.0));
  train_od->add_option("--keyboard", od.keyboard, "Keyboard layout file");
  train_od->add_option("--max-iters", od.max_iters, "Baum-Welch iteration limit");
  train_od->add_option("--conv-eps", od.conv_eps, "Baum-Welch convergence threshold");
  train_od->add_option("--seed", od.seed, "Ignored: training is deterministic");

  TrainLdArgs ld;
  auto* train_ld = app.add_subcommand("train-ld", "Train a language model");
  train_ld->add_option("--ld", ld.kind, "baseline, unigram or bigram")->required();
  train_ld->add_option("--corpus", ld.corpus, "Training corpus");
  train_ld->add_flag("--tagged", ld.tagged, "Corpus is word/TAG annotated (supervised bigram)");
  train_ld->add_flag("--untagged", ld.untagged, "Corpus is plain text (unsupervised bigram)");
  train_ld->add_option("--tagset", ld.tagset, "Tag set file");
  train_ld->add_option("--vocab", ld.vocab, "Vocabulary (lexicon file) for the unigram model");
  train_ld->add_option("--out", ld.out, "Output file")->required();
  train_ld->add_option("--eps-obs", ld.eps_obs, "Observation smoothing floor");
  train_ld->add_option("--eps-trans", ld.eps_trans, "Transition smoothing floor");
  train_ld->add_option("--max-iters", ld.max_iters, "Baum-Welch iteration limit");
  train_ld->add_option("--conv-eps", ld.conv_eps, "Baum-Welch convergence threshold");
  train_ld->add_option("--seed", ld.seed, "Ignored: training is deterministic");

  CorrectArgs cor;
  auto* correct = app.add_subcommand("correct", "Correct text line by line");
  correct->add_option("--models", cor.models, "Word model directory")->required();
  correct->add_option("--ld", cor.ld, "Language model file, or baseline (the default)");
  correct->add_option("--beam", cor.beam, "Beam width (default: unbounded)");
  correct->add_option("--nbest", cor.n_best, "Tokens kept per state (default: tag ambiguity)");
  correct->add_flag("--incremental", cor.incremental, "Feed characters one at a time");
  correct->add_flag("--tags", cor.tags, "Print word/TAG");
  correct->add_option("--input", cor.input, "Input file (default: stdin)");
  correct->add_option("--output", cor.output, "Output file (default: stdout)");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a correction run against a key");
  evaluate->add_option("--key", ev.key, "Key file: original<TAB>corrected")->required();
  evaluate->add_option("--run", ev.run, "Run output")->required();
  evaluate->add_option("--lexicon", ev.lexicon, "Lexicon for real-word classification");
  evaluate->add_option("--format", ev.format, "text or tsv");
  evaluate->add_option("--output", ev.output, "Report file (default: stdout)");

  GenErrorsArgs ge;
  auto* gen = app.add_subcommand("gen-errors", "Print the error corpus of one word");
  gen->add_option("--word", ge.word, "Word or model id, e.g. ' show'")->required();
  gen->add_option("--functions", ge.functions, "Error functions (default: all)");
  gen->add_option("--keyboard", ge.keyboard, "Keyboard layout file");
  gen->add_flag("--full-alphabet", ge.full_alphabet, "Insert and substitute every alphabet character");

  IsolatedArgs iso;
  auto* isolated = app.add_subcommand("isolated", "Best single word for each input line");
  isolated->add_option("--models", iso.models, "Word model directory")->required();
  isolated->add_option("--beam", iso.beam, "Beam width (default: unbounded)");
  isolated->add_option("--input", iso.input, "Input file (default: stdin)");

  try {
    std::vector<std::string> args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());  // CLI11 takes a reversed vector
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  }

  try {
    if (*train_od) return run_train_od(od);
    if (*train_ld) return run_train_ld(ld);
    if (*correct) return run_correct(cor);
    if (*evaluate) return run_evaluate(ev);
    if (*gen) return run_gen_errors(ge);
    if (*isolated) return run_isolated(iso);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
