#include "lexrec/lexrec.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "lexrec/error.hpp"
#include "lexrec/error_gen.hpp"
#include "lexrec/eval.hpp"
#include "lexrec/ld.hpp"
#include "lexrec/od.hpp"
#include "lexrec/recognizer.hpp"

struct lexrec_lexicon {
  std::shared_ptr<const lexrec::Lexicon> lexicon;
};

struct lexrec_ld {
  std::shared_ptr<const lexrec::LdModel> model;
};

struct lexrec_recognizer {
  std::unique_ptr<lexrec::Recognizer> recognizer;
};

struct lexrec_session {
  lexrec::Session session;
};

namespace {

thread_local std::string g_last_error;

lexrec_status status_of(lexrec::ErrorKind kind) {
  using lexrec::ErrorKind;
  switch (kind) {
    case ErrorKind::kInput: return LEXREC_ERR_INPUT;
    case ErrorKind::kParameter: return LEXREC_ERR_PARAMETER;
    case ErrorKind::kTraining: return LEXREC_ERR_TRAINING;
    case ErrorKind::kNumeric: return LEXREC_ERR_NUMERIC;
    case ErrorKind::kNoHypothesis: return LEXREC_ERR_NO_HYPOTHESIS;
    case ErrorKind::kEvaluation: return LEXREC_ERR_EVALUATION;
    case ErrorKind::kIo: return LEXREC_ERR_IO;
    case ErrorKind::kInternal: return LEXREC_ERR_INTERNAL;
  }
  return LEXREC_ERR_INTERNAL;
}

template <class F>
lexrec_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return LEXREC_OK;
  } catch (const lexrec::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LEXREC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LEXREC_ERR_INTERNAL;
  }
}

lexrec_status null_argument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return LEXREC_ERR_NULL_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lexrec::KeyboardLayout keyboard_from(const char* path) {
  if (!path || !*path) return lexrec::KeyboardLayout::qwerty();
  std::ifstream in(path);
  if (!in) lexrec::fail(lexrec::ErrorKind::kIo, std::string("cannot read keyboard layout ") + path);
  return lexrec::KeyboardLayout::parse(in);
}

std::ifstream open_input(const char* path, const char* what) {
  std::ifstream in(path);
  if (!in) lexrec::fail(lexrec::ErrorKind::kIo, std::string("cannot read ") + what + " " + path);
  return in;
}

}  // namespace

extern "C" {

const char* lexrec_version(void) { return "1.0.0"; }

const char* lexrec_status_name(lexrec_status status) {
  switch (status) {
    case LEXREC_OK: return "ok";
    case LEXREC_ERR_INPUT: return "input error";
    case LEXREC_ERR_PARAMETER: return "parameter error";
    case LEXREC_ERR_TRAINING: return "training error";
    case LEXREC_ERR_NUMERIC: return "numeric error";
    case LEXREC_ERR_NO_HYPOTHESIS: return "no hypothesis";
    case LEXREC_ERR_EVALUATION: return "evaluation error";
    case LEXREC_ERR_IO: return "i/o error";
    case LEXREC_ERR_INTERNAL: return "internal error";
    case LEXREC_ERR_NULL_ARGUMENT: return "null argument";
  }
  return "unknown status";
}

const char* lexrec_last_error(void) { return g_last_error.c_str(); }

void lexrec_string_free(char* s) { std::free(s); }

// ---- orthographic decoder ----

void lexrec_od_options_init(lexrec_od_options* options) {
  if (!options) return;
  const lexrec::OdTrainingOptions defaults;
  options->with_space_state = 1;
  options->delta = static_cast<unsigned>(defaults.model.delta);
  options->eps_obs = defaults.eps_obs;
  options->error_functions = lexrec::kDefaultTrainingFunctions;
  options->filter_real_words = 1;
  options->max_iters = static_cast<unsigned>(defaults.training.max_iters);
  options->conv_eps = defaults.training.conv_eps;
  options->keyboard_path = nullptr;
}

lexrec_status lexrec_lexicon_train(const char* lexicon_path, const lexrec_od_options* options,
                                   lexrec_lexicon** out) {
  if (!lexicon_path) return null_argument("lexicon_path");
  if (!out) return null_argument("out");
  return guarded([&] {
    lexrec_od_options opts;
    lexrec_od_options_init(&opts);
    if (options) opts = *options;
    if ((opts.error_functions & ~static_cast<unsigned>(lexrec::kAllErrorFunctions)) != 0) {
      lexrec::fail(lexrec::ErrorKind::kParameter, "unknown error function bits");
    }
    lexrec::OdTrainingOptions od;
    od.model.with_space_state = opts.with_space_state != 0;
    od.model.delta = opts.delta;
    od.eps_obs = opts.eps_obs;
    od.functions = opts.error_functions;
    od.filter_real_words = opts.filter_real_words != 0;
    od.training.max_iters = opts.max_iters;
    od.training.conv_eps = opts.conv_eps;
    od.keyboard = keyboard_from(opts.keyboard_path);
    const auto entries = lexrec::read_lexicon_file(lexicon_path);
    auto lex = std::make_shared<const lexrec::Lexicon>(
        lexrec::train_lexicon(entries, lexrec::CharacterAlphabet::standard(), od));
    *out = new lexrec_lexicon{std::move(lex)};
  });
}

lexrec_status lexrec_lexicon_save(const lexrec_lexicon* lexicon, const char* dir) {
  if (!lexicon) return null_argument("lexicon");
  if (!dir) return null_argument("dir");
  return guarded([&] { lexrec::save_lexicon(*lexicon->lexicon, dir); });
}

lexrec_status lexrec_lexicon_load(const char* dir, lexrec_lexicon** out) {
  if (!dir) return null_argument("dir");
  if (!out) return null_argument("out");
  return guarded([&] {
    auto lex = std::make_shared<const lexrec::Lexicon>(lexrec::load_lexicon(dir));
    *out = new lexrec_lexicon{std::move(lex)};
  });
}

size_t lexrec_lexicon_size(const lexrec_lexicon* lexicon) {
  return lexicon ? lexicon->lexicon->size() : 0;
}

void lexrec_lexicon_free(lexrec_lexicon* lexicon) { delete lexicon; }

lexrec_status lexrec_lexicon_best_word(const lexrec_lexicon* lexicon, const char* input, double beam,
                                       char** word, double* cost) {
  if (!lexicon) return null_argument("lexicon");
  if (!input) return null_argument("input");
  if (!word) return null_argument("word");
  return guarded([&] {
    const double b = beam < 0.0 ? lexrec::kInfiniteCost : beam;
    const auto result = lexrec::best_word_isolated(*lexicon->lexicon, input, b);
    *word = copy_string(result.word);
    if (cost) *cost = result.cost;
  });
}

lexrec_status lexrec_generate_errors(const char* word, unsigned error_functions,
                                     const char* keyboard_path, int full_alphabet, char** dump) {
  if (!word) return null_argument("word");
  if (!dump) return null_argument("dump");
  return guarded([&] {
    if (!*word) lexrec::fail(lexrec::ErrorKind::kInput, "empty word");
    if ((error_functions & ~static_cast<unsigned>(lexrec::kAllErrorFunctions)) != 0) {
      lexrec::fail(lexrec::ErrorKind::kParameter, "unknown error function bits");
    }
    lexrec::KeyboardLayout kb = keyboard_from(keyboard_path);
    lexrec::ErrorCorpus corpus{word, {}};
    if (full_alphabet) {
      // Neighbour-based functions run over the whole alphabet instead.
      const std::string alphabet = lexrec::CharacterAlphabet::standard().characters();
      lexrec::KeyboardLayout empty;
      corpus = lexrec::build_error_corpus(
          word, error_functions & ~(lexrec::kInsertion | lexrec::kSubstitution), empty);
      std::set<std::string> seen{corpus.source};
      for (const auto& c : corpus.corruptions) seen.insert(c.text);
      const auto add = [&](std::vector<std::string> raw, lexrec::ErrorFunction op) {
        for (auto& s : raw) {
          if (s.empty() || !seen.insert(s).second) continue;
          corpus.corruptions.push_back({std::move(s), op});
        }
      };
      if (error_functions & lexrec::kInsertion) add(lexrec::gen_insertions_full(word, alphabet), lexrec::kInsertion);
      if (error_functions & lexrec::kSubstitution) {
        add(lexrec::gen_substitutions_full(word, alphabet), lexrec::kSubstitution);
      }
    } else {
      corpus = lexrec::build_error_corpus(word, error_functions, kb);
    }
    std::ostringstream out;
    lexrec::write_corpus_dump(out, corpus);
    *dump = copy_string(out.str());
  });
}

// ---- linguistic decoder ----

void lexrec_ld_options_init(lexrec_ld_options* options) {
  if (!options) return;
  options->kind = LEXREC_LD_BASELINE;
  options->corpus_path = nullptr;
  options->tagged = 1;
  options->tagset_path = nullptr;
  options->vocabulary_path = nullptr;
  options->eps_obs = -1.0;
  options->eps_trans = -1.0;
  const lexrec::TrainingOptions training;
  options->max_iters = static_cast<unsigned>(training.max_iters);
  options->conv_eps = training.conv_eps;
}

lexrec_status lexrec_ld_train(const lexrec_ld_options* options, lexrec_ld** out) {
  if (!options) return null_argument("options");
  if (!out) return null_argument("out");
  return guarded([&] {
    using lexrec::ErrorKind;
    std::optional<lexrec::LdModel> model;
    switch (options->kind) {
      case LEXREC_LD_BASELINE:
        model = lexrec::LdModel::baseline();
        break;
      case LEXREC_LD_UNIGRAM: {
        if (!options->corpus_path) lexrec::fail(ErrorKind::kParameter, "unigram model needs a corpus");
        if (!options->vocabulary_path) lexrec::fail(ErrorKind::kParameter, "unigram model needs a vocabulary");
        std::vector<std::string> vocab;
        for (const auto& e : lexrec::read_lexicon_file(options->vocabulary_path)) vocab.push_back(e.word);
        auto in = open_input(options->corpus_path, "corpus");
        const auto corpus = lexrec::parse_untagged_corpus(in);
        lexrec::UnigramOptions uo;
        if (options->eps_obs >= 0.0) uo.eps_obs = options->eps_obs;
        if (options->eps_trans >= 0.0) uo.eps_trans = options->eps_trans;
        model = lexrec::build_unigram(corpus, vocab, uo);
        break;
      }
      case LEXREC_LD_BIGRAM: {
        if (!options->corpus_path) lexrec::fail(ErrorKind::kParameter, "bigram model needs a corpus");
        if (!options->tagset_path) lexrec::fail(ErrorKind::kParameter, "bigram model needs a tag set");
        const lexrec::TagSet tags = lexrec::TagSet::read_file(options->tagset_path);
        lexrec::BigramOptions bo;
        if (options->eps_obs >= 0.0) bo.eps_obs = options->eps_obs;
        if (options->eps_trans >= 0.0) bo.eps_trans = options->eps_trans;
        bo.training.max_iters = options->max_iters;
        bo.training.conv_eps = options->conv_eps;
        auto in = open_input(options->corpus_path, "corpus");
        if (options->tagged) {
          model = lexrec::build_bigram_supervised(lexrec::parse_tagged_corpus(in), tags, bo);
        } else {
          model = lexrec::build_bigram_unsupervised(lexrec::parse_untagged_corpus(in), tags, bo);
        }
        break;
      }
      default:
        lexrec::fail(ErrorKind::kParameter, "unknown language model kind");
    }
    *out = new lexrec_ld{std::make_shared<const lexrec::LdModel>(std::move(*model))};
  });
}

lexrec_status lexrec_ld_save(const lexrec_ld* ld, const char* path) {
  if (!ld) return null_argument("ld");
  if (!path) return null_argument("path");
  return guarded([&] { lexrec::save_ld(*ld->model, path); });
}

lexrec_status lexrec_ld_load(const char* path, lexrec_ld** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new lexrec_ld{std::make_shared<const lexrec::LdModel>(lexrec::load_ld(path))};
  });
}

lexrec_ld_kind lexrec_ld_get_kind(const lexrec_ld* ld) {
  if (!ld) return LEXREC_LD_BASELINE;
  switch (ld->model->kind()) {
    case lexrec::LdKind::kBaseline: return LEXREC_LD_BASELINE;
    case lexrec::LdKind::kUnigram: return LEXREC_LD_UNIGRAM;
    case lexrec::LdKind::kBigram: return LEXREC_LD_BIGRAM;
  }
  return LEXREC_LD_BASELINE;
}

void lexrec_ld_free(lexrec_ld* ld) { delete ld; }

// ---- recognition ----

void lexrec_recognizer_options_init(lexrec_recognizer_options* options) {
  if (!options) return;
  options->beam = -1.0;
  options->n_best = 0;
}

lexrec_status lexrec_recognizer_create(const lexrec_lexicon* lexicon, const lexrec_ld* ld,
                                       const lexrec_recognizer_options* options,
                                       lexrec_recognizer** out) {
  if (!lexicon) return null_argument("lexicon");
  if (!ld) return null_argument("ld");
  if (!out) return null_argument("out");
  return guarded([&] {
    lexrec_recognizer_options opts;
    lexrec_recognizer_options_init(&opts);
    if (options) opts = *options;
    lexrec::RecognizerConfig cfg;
    cfg.beam_width = opts.beam < 0.0 ? lexrec::kInfiniteCost : opts.beam;
    cfg.n_best = opts.n_best == 0 ? ld->model->max_ambiguity() : opts.n_best;
    auto rec = std::make_unique<lexrec::Recognizer>(lexicon->lexicon, ld->model, cfg);
    *out = new lexrec_recognizer{std::move(rec)};
  });
}

void lexrec_recognizer_free(lexrec_recognizer* recognizer) { delete recognizer; }

lexrec_status lexrec_correct(const lexrec_recognizer* recognizer, const char* line, int with_tags,
                             char** corrected, double* cost) {
  if (!recognizer) return null_argument("recognizer");
  if (!line) return null_argument("line");
  if (!corrected) return null_argument("corrected");
  return guarded([&] {
    const auto result = recognizer->recognizer->recognize(line);
    *corrected = copy_string(lexrec::format_hypothesis(result.best(), recognizer->recognizer->ld(), with_tags != 0));
    if (cost) *cost = result.best().cost;
  });
}

lexrec_status lexrec_session_create(const lexrec_recognizer* recognizer, lexrec_session** out) {
  if (!recognizer) return null_argument("recognizer");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new lexrec_session{recognizer->recognizer->start()};
  });
}

lexrec_status lexrec_session_feed(lexrec_session* session, const char* chars, size_t length) {
  if (!session) return null_argument("session");
  if (!chars && length > 0) return null_argument("chars");
  return guarded([&] { session->session.feed(std::string_view(chars ? chars : "", length)); });
}

lexrec_status lexrec_session_finalize(lexrec_session* session, int with_tags, char** corrected,
                                      double* cost) {
  if (!session) return null_argument("session");
  if (!corrected) return null_argument("corrected");
  return guarded([&] {
    const auto result = session->session.finalize();
    *corrected = copy_string(lexrec::format_hypothesis(result.best(), session->session.ld(), with_tags != 0));
    if (cost) *cost = result.best().cost;
  });
}

void lexrec_session_free(lexrec_session* session) { delete session; }

// ---- evaluation ----

lexrec_status lexrec_evaluate_files(const char* key_path, const char* run_path, const char* lexicon_path,
                                    lexrec_report_format format, char** report, int* consistent) {
  if (!key_path) return null_argument("key_path");
  if (!run_path) return null_argument("run_path");
  if (!report) return null_argument("report");
  return guarded([&] {
    auto key_in = open_input(key_path, "key");
    const auto key = lexrec::parse_key(key_in);
    auto run_in = open_input(run_path, "run output");
    const auto run = lexrec::parse_run(run_in, key);
    std::set<std::string> lexicon;
    if (lexicon_path) {
      for (const auto& e : lexrec::read_lexicon_file(lexicon_path)) lexicon.insert(e.word);
    }
    const auto rep = lexrec::evaluate(run, key, lexicon);
    *report = copy_string(format == LEXREC_REPORT_TSV ? lexrec::format_report_tsv(rep)
                                                      : lexrec::format_report_text(rep));
    if (consistent) {
      bool ok = rep.consistent();
      for (const auto& row : rep.rows) {
        if (row.recall() && row.precision() && *row.precision() > *row.recall()) ok = false;
      }
      *consistent = ok ? 1 : 0;
    }
  });
}

}  // extern "C"
