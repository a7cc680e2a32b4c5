// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lexrec/error.hpp"
#include "lexrec/error_gen.hpp"
#include "lexrec/eval.hpp"
#include "lexrec/recognizer.hpp"
#include "oracles.hpp"

using namespace lexrec;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

// ---- 1 -------------------------------------------------------------------

Outcome hmm_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> n_dist(3, 6), k_dist(1, 4), t_dist(1, 8);
  double worst = 0.0;
  for (int c = 0; c < 200; ++c) {
    const Hmm h = oracle::random_hmm(rng, n_dist(rng), k_dist(rng), 0.2);
    const auto obs = oracle::random_obs(rng, t_dist(rng), h.alphabet_size());
    const double total = oracle::total_probability(h, obs);
    const double fwd = forward(h, obs).probability;
    const double best = oracle::best_path_probability(h, obs);
    const double vit = viterbi(h, obs).probability;
    const double e = std::max(rel_diff(fwd, total), rel_diff(vit, best));
    worst = std::max(worst, e);
    if (e > 1e-12) o.fail("case " + std::to_string(c) + " relative error " + std::to_string(e));
  }
  const double secs = seconds_since(t0);
  if (secs >= 10.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "200 cases, max relative error %.2e, %.2f s", worst, secs);
    o.detail = buf;
  }
  return o;
}

// ---- 2 -------------------------------------------------------------------

std::vector<Symbol> sample(const Hmm& h, std::mt19937_64& rng, std::size_t max_len) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto draw = [&](auto get, std::size_t n) {
    double r = u(rng), acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = get(i);
      if (p <= 0.0) continue;
      last = i;
      acc += p;
      if (r < acc) return i;
    }
    return last;
  };
  std::vector<Symbol> out;
  std::size_t state = 0;
  while (out.size() <= max_len) {
    state = 1 + draw([&](std::size_t j) { return h.trans(state, j + 1); }, h.num_states() - 1);
    if (state == h.exit()) return out;
    out.push_back(static_cast<Symbol>(draw([&](std::size_t s) { return h.obs(state, static_cast<Symbol>(s)); },
                                           h.alphabet_size())));
  }
  return {};
}

Outcome baum_welch_monotone() {
  Outcome o;
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<std::size_t> n_dist(3, 6), k_dist(2, 4);
  TrainingOptions opt;
  opt.max_iters = 10;
  opt.conv_eps = -kInfiniteCost;
  double worst_drop = 0.0, worst_row = 0.0;
  for (int c = 0; c < 50; ++c) {
    Hmm truth = oracle::random_hmm(rng, n_dist(rng), k_dist(rng), 0.2);
    std::vector<ObservationSequence> corpus;
    for (int attempt = 0; corpus.size() < 4; ++attempt) {
      if (attempt == 200) {
        // Exit hardly reachable; draw another model.
        truth = oracle::random_hmm(rng, n_dist(rng), k_dist(rng), 0.2);
        corpus.clear();
        attempt = 0;
      }
      auto s = sample(truth, rng, 20);
      if (!s.empty()) corpus.push_back(std::move(s));
    }
    // Start from a perturbed copy so training has work to do.
    Hmm start = truth;
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    for (std::size_t i = 0; i + 1 < start.num_states(); ++i) {
      auto row = start.trans_row(i);
      double sum = 0.0;
      for (double& p : row) sum += (p *= jitter(rng));
      for (double& p : row) p /= sum;
    }
    const TrainingResult r = baum_welch_multi(start, corpus, opt);
    if (r.log_likelihood.size() != 11) o.fail("model " + std::to_string(c) + " stopped early");
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
      const double drop = r.log_likelihood[i - 1] - r.log_likelihood[i];
      worst_drop = std::max(worst_drop, drop);
      if (drop > 1e-12) o.fail("model " + std::to_string(c) + " log-likelihood fell by " + std::to_string(drop));
    }
    for (std::size_t i = 0; i + 1 < r.model.num_states(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 1; j < r.model.num_states(); ++j) sum += r.model.trans(i, j);
      worst_row = std::max(worst_row, std::abs(sum - 1.0));
      if (std::abs(sum - 1.0) > 1e-9) o.fail("model " + std::to_string(c) + " row sum " + std::to_string(sum));
    }
  }
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "50 models x 10 iterations, largest drop %.2e, largest row error %.2e", worst_drop,
                  worst_row);
    o.detail = buf;
  }
  return o;
}

// ---- 3 -------------------------------------------------------------------

Outcome tp_equals_viterbi() {
  Outcome o;
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<std::size_t> n_dist(3, 8), k_dist(1, 4), t_dist(1, 12);
  for (int c = 0; c < 100; ++c) {
    const Hmm h = oracle::random_hmm(rng, n_dist(rng), k_dist(rng), 0.25);
    const auto obs = oracle::random_obs(rng, t_dist(rng), h.alphabet_size());
    TokenNetwork net(std::make_shared<const CostModel>(h), "m");
    net.enter(Token::start());
    for (Symbol s : obs) net.step(s);
    const auto exits = net.exit_tokens();
    const double tp = exits.empty() ? kInfiniteCost : exits.front().cost;
    const double vc = viterbi_cost(h, obs).cost;
    if (tp != vc) o.fail("case " + std::to_string(c) + ": " + std::to_string(tp) + " vs " + std::to_string(vc));
  }
  if (o.pass) o.detail = "100 cases, exact equality";
  return o;
}

// ---- 4 -------------------------------------------------------------------

Outcome wld_oracle() {
  Outcome o;
  std::mt19937_64 rng(4004);
  std::uniform_int_distribution<std::size_t> len(0, 8);
  std::uniform_int_distribution<int> ch('a', 'd'), quarter(1, 12);
  const auto word = [&](std::size_t min_len) {
    std::string s(std::max(min_len, len(rng)), 'a');
    for (char& c : s) c = static_cast<char>(ch(rng));
    return s;
  };
  for (int c = 0; c < 500; ++c) {
    const std::string ref = word(1), obs = word(0);
    const double sub = quarter(rng) / 4.0, ins = quarter(rng) / 4.0, del = quarter(rng) / 4.0;
    const double got = wld_distance(ref, obs, sub, ins, del);
    const double want = oracle::weighted_levenshtein(ref, obs, sub, ins, del);
    if (got != want) o.fail("'" + ref + "' vs '" + obs + "': " + std::to_string(got) + " != " + std::to_string(want));
    if (wld_distance(ref, ref, sub, ins, del) != 0.0) o.fail("identity pair '" + ref + "' not 0");
  }
  if (o.pass) o.detail = "500 pairs, exact equality; identity pairs 0";
  return o;
}

// ---- 5 -------------------------------------------------------------------

Outcome error_gen_arithmetic() {
  Outcome o;
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz .";
  const std::string distinct = "qwertyuiop";
  for (std::size_t n = 1; n <= 10; ++n) {
    const std::string w = distinct.substr(0, n);
    const std::size_t total = gen_deletions(w).size() + gen_insertions_full(w, alphabet).size() +
                              gen_substitutions_full(w, alphabet).size() + gen_transpositions(w).size();
    if (total != 57 * n + 27) o.fail("n=" + std::to_string(n) + " gives " + std::to_string(total));
  }
  const std::vector<std::string> expected{"show", " how", " sow", " shw", " sho"};
  if (gen_deletions(" show") != expected) o.fail("\" show\" deletion set differs");
  if (o.pass) o.detail = "57n+27 for n=1..10; \" show\" deletions exact";
  return o;
}

// ---- toy systems -----------------------------------------------------------

std::shared_ptr<const Lexicon> train_words(const std::vector<std::string>& words) {
  std::vector<LexiconEntry> e;
  for (const auto& w : words) e.push_back({w, false});
  return std::make_shared<const Lexicon>(train_lexicon(e, CharacterAlphabet::standard()));
}

TagSet parse_tags(const std::string& text) {
  std::istringstream in(text);
  return TagSet::parse(in);
}

std::vector<TaggedSentence> parse_tagged(const std::string& text) {
  std::istringstream in(text);
  return parse_tagged_corpus(in);
}

std::vector<Sentence> parse_plain(const std::string& text) {
  std::istringstream in(text);
  return parse_untagged_corpus(in);
}

std::shared_ptr<const LdModel> share(LdModel m) { return std::make_shared<const LdModel>(std::move(m)); }

// "x" is A or B, "y" only follows B cheaply.
std::shared_ptr<const LdModel> ambiguous_ld() {
  Hmm h(5, 3);
  h.set_trans(0, 1, 0.9);
  h.set_trans(0, 2, 0.1);
  h.set_trans(1, 1, 0.5);
  h.set_trans(1, 3, 0.01);
  h.set_trans(1, 4, 0.49);
  h.set_trans(2, 3, 0.9);
  h.set_trans(2, 4, 0.1);
  h.set_trans(3, 4, 1.0);
  h.set_obs(1, 0, 0.5);
  h.set_obs(1, 2, 0.5);
  h.set_obs(2, 0, 1.0);
  h.set_obs(3, 1, 1.0);
  return share(LdModel(LdKind::kBigram, h, {"x", "y", "z"}, {"A", "B", "C"}));
}

struct Scenario {
  std::shared_ptr<const Lexicon> lexicon;
  std::shared_ptr<const LdModel> ld;
  std::string input;
  std::string label;
};

std::vector<Scenario> ctr_scenarios() {
  std::vector<Scenario> out;
  const auto add = [&](const std::shared_ptr<const Lexicon>& lex, const std::shared_ptr<const LdModel>& ld,
                       const std::string& name, std::initializer_list<const char*> inputs) {
    for (const char* in : inputs) out.push_back({lex, ld, in, name});
  };

  const auto cars = train_words({"show", "me", "all", "cars"});
  add(cars, share(LdModel::baseline()), "cars/baseline", {"show me cars", "showme allcars", "sho me al car"});
  add(cars, share(build_unigram(parse_plain("show me all cars\nshow all cars\nshow me cars\n"),
                                std::vector<std::string>{"show", "me", "all", "cars"})),
      "cars/unigram", {"show me cars", "showall cars", "me al cars"});
  const TagSet cars_tags = parse_tags("V\nPRON\nDET\nN\nshow\tV,N\nme\tPRON\nall\tDET,PRON\ncars\tN\n");
  add(cars,
      share(build_bigram_supervised(
          parse_tagged("show/V me/PRON all/DET cars/N\nshow/V all/PRON\nall/DET cars/N show/V\n"), cars_tags)),
      "cars/bigram", {"showme allcars", "all cars shw", "shoe all", "al show me"});

  const auto roses = train_words({"he", "gave", "her", "roses", "have"});
  const TagSet roses_tags = parse_tags("PRON\nV\nDET\nN\nhe\tPRON\nher\tPRON,DET\ngave\tV\nhave\tV\nroses\tN\n");
  add(roses,
      share(build_bigram_supervised(
          parse_tagged("he/PRON gave/V her/DET roses/N\nhe/PRON gave/V her/PRON roses/N\nhe/PRON have/V roses/N\n"),
          roses_tags)),
      "roses/bigram", {"he gaveher", "gave her rose", "he hav roses", "hegave her"});
  add(roses, share(LdModel::baseline()), "roses/baseline", {"he gaveher", "gaveroses"});

  add(train_words({"x", "y", "z"}), ambiguous_ld(), "xyz/ambiguous", {"x y", "x z y", "z x y", "xy", "x y x y"});

  const auto sand = train_words({"a", "an", "and", "sand", "hand"});
  add(sand, share(build_unigram(parse_plain("a hand and a sand\nand an hand\n"), std::vector<std::string>{"a", "an", "and", "sand", "hand"})),
      "sand/unigram", {"a sandand hand", "anhand", "sand an"});
  return out;
}

// ---- 6 -------------------------------------------------------------------

Outcome ctr_brute_force() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto scenarios = ctr_scenarios();
  std::size_t ambiguous = 0;
  for (const Scenario& s : scenarios) {
    if (s.input.size() > 14) o.fail("input too long: " + s.input);
    RecognizerConfig cfg;
    cfg.n_best = std::max<std::size_t>(1, s.ld->max_ambiguity());
    if (cfg.n_best > 1) ++ambiguous;
    const Recognizer rec(s.lexicon, s.ld, cfg);
    const double got = rec.recognize(s.input).best().cost;
    const double want = oracle::ctr_search({s.lexicon.get(), s.ld.get()}, s.input, true).cost;
    if (rel_diff(got, want) > 1e-9) {
      o.fail(s.label + " '" + s.input + "': " + std::to_string(got) + " vs " + std::to_string(want));
    }
  }
  const double secs = seconds_since(t0);
  if (scenarios.size() < 20) o.fail("only " + std::to_string(scenarios.size()) + " scenarios");
  if (secs >= 60.0) o.fail("took " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%zu scenarios (%zu with tag ambiguity), %.2f s", scenarios.size(), ambiguous,
                  secs);
    o.detail = buf;
  }
  return o;
}

// ---- 7 -------------------------------------------------------------------

Outcome segmentation_demo() {
  Outcome o;
  const auto lex = train_words({"show", "me", "all", "cars"});
  const Recognizer rec(lex, share(LdModel::baseline()));
  const Hypothesis h = rec.recognize("show me all cars").best();
  if (h.model_ids != std::vector<std::string>{" show", " me", " all", " cars"}) {
    o.fail("got '" + format_hypothesis(h, rec.ld(), false) + "'");
  }
  if (h.boundaries != std::vector<std::size_t>{4, 7, 11, 16}) o.fail("wrong boundaries");
  if (o.pass) o.detail = "[show | me | all | cars], boundaries 4 7 11 16";
  return o;
}

// ---- 8 -------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t model_index(const Lexicon& lex, const std::string& word) {
  for (std::size_t m = 0; m < lex.size(); ++m) {
    if (lex.model(m).word() == word) return m;
  }
  throw std::runtime_error("no model for " + word);
}

// Cheapest tag labelling of one fixed segmentation and word sequence.
double reading_cost(const oracle::CtrProblem& p, const std::string& input, const std::vector<std::size_t>& ends,
                    const std::vector<std::string>& words) {
  const auto seg = oracle::segment_costs(p, input);
  const std::size_t contexts = p.ld->num_contexts();
  std::vector<double> cur(contexts, kInfiniteCost);
  std::size_t begin = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const std::size_t m = model_index(*p.lexicon, words[i]);
    std::vector<double> next(contexts, kInfiniteCost);
    for (std::size_t j = 0; j < contexts; ++j) {
      const double local = seg[m][begin][ends[i]] + oracle::word_cost(p, m, j);
      if (i == 0) {
        next[j] = p.ld->entry_cost(j) + local;
        continue;
      }
      for (std::size_t k = 0; k < contexts; ++k) {
        next[j] = std::min(next[j], cur[k] + p.ld->transition_cost(k, j) + local);
      }
    }
    cur = next;
    begin = ends[i];
  }
  double best = kInfiniteCost;
  for (std::size_t j = 0; j < contexts; ++j) best = std::min(best, cur[j] + p.ld->exit_cost(j));
  return best;
}

Outcome repair_demos() {
  Outcome o;
  const std::string toy = std::string(LEXREC_TEST_DATA) + "/toy";
  std::ifstream lex_in(toy + "/lexicon.txt");
  auto entries = parse_lexicon(lex_in);
  entries.push_back({"e", false});
  const auto lex = std::make_shared<const Lexicon>(train_lexicon(entries, CharacterAlphabet::standard()));
  // "e" is a word the corpus never uses, so the split reading stays costly.
  const TagSet tags = parse_tags(slurp(toy + "/tagset.txt") + "e\tN\n");
  std::ifstream corpus_in(toy + "/corpus_tagged.txt");
  const auto ld = share(build_bigram_supervised(parse_tagged_corpus(corpus_in), tags));
  RecognizerConfig cfg;
  cfg.n_best = ld->max_ambiguity();
  const Recognizer rec(lex, ld, cfg);

  const auto check = [&](const std::string& input, const std::string& expected) {
    const Hypothesis h = rec.recognize(input).best();
    const std::string got = format_hypothesis(h, *ld, false);
    const auto best = oracle::ctr_search({lex.get(), ld.get()}, input, false);
    std::string oracle_text;
    for (const auto& w : best.words) oracle_text += (oracle_text.empty() ? "" : " ") + w;
    if (got != expected) o.fail("'" + input + "' -> '" + got + "'");
    if (oracle_text != expected) o.fail("oracle reads '" + input + "' as '" + oracle_text + "'");
    if (rel_diff(h.cost, best.cost) > 1e-9) o.fail("'" + input + "' cost differs from the oracle");
  };
  check("he gaveher roses", "he gave her roses");
  check("i hav e roses", "i have roses");

  // The split reading with the real word "e" is finite but costlier.
  const std::string input = "i hav e roses";
  const double split = reading_cost({lex.get(), ld.get()}, input, {1, 5, 7, 13}, {"i", "have", "e", "roses"});
  const double joined = reading_cost({lex.get(), ld.get()}, input, {1, 7, 13}, {"i", "have", "roses"});
  if (!(split < kInfiniteCost) || !(split > joined)) o.fail("split reading is not the costlier one");
  if (o.pass) o.detail = "run-on and split repairs match the brute-force oracle";
  return o;
}

// ---- 9 -------------------------------------------------------------------

struct Grammar {
  std::vector<std::vector<std::string>> words;  // per tag
  std::vector<std::string> tags;
};

Grammar synthetic_grammar() {
  Grammar g;
  g.tags = {"DET", "ADJ", "N", "V", "PRON", "PREP"};
  g.words = {
      {"the", "a", "this", "that", "every"},
      {"red", "blue", "cheap", "new", "old", "fast", "small", "green", "big", "quiet"},
      {"car", "house", "dog", "cat", "road", "tree", "book", "plane", "river", "garden", "table", "window", "horse",
       "train", "city"},
      {"sees", "likes", "buys", "sells", "paints", "finds", "wants", "needs", "drives", "owns", "moves", "keeps"},
      {"he", "she", "we", "they"},
      {"near", "under", "behind", "beside"},
  };
  return g;
}

TaggedSentence generate_sentence(const Grammar& g, std::mt19937_64& rng) {
  TaggedSentence s;
  const auto pick = [&](std::size_t tag) {
    std::uniform_int_distribution<std::size_t> d(0, g.words[tag].size() - 1);
    s.push_back({g.words[tag][d(rng)], g.tags[tag]});
  };
  std::bernoulli_distribution coin(0.5);
  const auto noun_phrase = [&](bool allow_pronoun) {
    if (allow_pronoun && coin(rng)) {
      pick(4);
      return;
    }
    pick(0);
    if (coin(rng)) pick(1);
    pick(2);
  };
  noun_phrase(true);
  pick(3);
  noun_phrase(false);
  if (coin(rng)) {
    pick(5);
    noun_phrase(false);
  }
  return s;
}

std::string join(const TaggedSentence& s) {
  std::string out;
  for (const auto& t : s) out += (out.empty() ? "" : " ") + t.word;
  return out;
}

struct SyntheticRun {
  std::vector<KeyPair> key;
  std::vector<RunPair> run;
  std::set<std::string> lexicon;
};

SyntheticRun synthetic_run() {
  const Grammar g = synthetic_grammar();
  std::string tagset_text;
  for (const auto& t : g.tags) tagset_text += t + "\n";
  std::vector<LexiconEntry> entries;
  SyntheticRun out;
  for (std::size_t t = 0; t < g.tags.size(); ++t) {
    for (const auto& w : g.words[t]) {
      tagset_text += w + "\t" + g.tags[t] + "\n";
      entries.push_back({w, false});
      out.lexicon.insert(w);
    }
  }
  const TagSet tags = parse_tags(tagset_text);

  std::mt19937_64 rng(9009);
  std::vector<TaggedSentence> train;
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    train.push_back(generate_sentence(g, rng));
    seen.insert(join(train.back()));
  }
  const auto ld = share(build_bigram_supervised(train, tags));
  const auto lex = std::make_shared<const Lexicon>(train_lexicon(entries, CharacterAlphabet::standard()));
  RecognizerConfig cfg;
  cfg.n_best = ld->max_ambiguity();
  const Recognizer rec(lex, ld, cfg);

  // Held-out sentences, one keyboard error each, from functions the models
  // were not trained on.
  const KeyboardLayout kb = KeyboardLayout::qwerty();
  while (out.key.size() < 200) {
    const TaggedSentence s = generate_sentence(g, rng);
    const std::string clean = join(s);
    if (seen.count(clean)) continue;
    seen.insert(clean);
    std::uniform_int_distribution<std::size_t> pos(0, s.size() - 1);
    const std::size_t i = pos(rng);
    const std::string& w = s[i].word;
    std::vector<std::string> variants;
    for (auto v : {gen_insertions(w, kb), gen_transpositions(w), gen_double_strokes(w)}) {
      for (auto& x : v) {
        if (x != w && !out.lexicon.count(x)) variants.push_back(std::move(x));
      }
    }
    if (variants.empty()) continue;
    std::uniform_int_distribution<std::size_t> vd(0, variants.size() - 1);
    TaggedSentence noisy = s;
    noisy[i].word = variants[vd(rng)];
    const std::string input = join(noisy);
    out.key.push_back({input, clean});
    std::string output;
    try {
      output = format_hypothesis(rec.recognize(input).best(), *ld, false);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNoHypothesis) throw;
      output = input;
    }
    out.run.push_back({input, output});
  }
  return out;
}

Outcome synthetic_end_to_end(EvaluationReport& report) {
  Outcome o;
  const auto t0 = Clock::now();
  const SyntheticRun r = synthetic_run();
  report = evaluate(r.run, r.key, r.lexicon);
  const auto& ns = report.row("nonword-single");
  const double recall = ns.recall().value_or(0.0);
  if (ns.a < 150) o.fail("only " + std::to_string(ns.a) + " nonword single errors");
  if (recall < 80.0) o.fail("nonword-single recall " + std::to_string(recall));
  for (const auto& row : report.rows) {
    if (row.recall() && row.precision() && *row.precision() > *row.recall()) o.fail(row.name + ": precision > recall");
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "nonword-single recall %.1f%% (%zu/%zu), precision %.1f%%, total recall %.1f%%, %.1f s",
                recall, ns.b, ns.a, ns.precision().value_or(0.0), report.row("total").recall().value_or(0.0),
                seconds_since(t0));
  if (o.pass) {
    o.detail = buf;
  } else {
    o.detail += "; " + std::string(buf);
  }
  return o;
}

// ---- 10 ------------------------------------------------------------------

Outcome evaluation_protocol(const EvaluationReport& synthetic) {
  Outcome o;
  std::vector<EvaluationReport> reports{synthetic};
  const SyntheticRun base = [] {
    SyntheticRun r;
    r.lexicon = {"he", "gave", "her", "roses", "have", "i", "e"};
    r.key = {{"he gaveher roses", "he gave her roses"}, {"i hav e roses", "i have roses"},
             {"he gave her roses", "he gave her roses"}, {"i hve rses", "i have roses"}};
    return r;
  }();
  std::mt19937_64 rng(1010);
  const std::vector<std::string> outputs{"he gave her roses", "i have roses", "i have e roses", "he gaveher roses",
                                         "i hve roses", "he gave roses"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RunPair> run;
    for (const auto& k : base.key) {
      std::uniform_int_distribution<std::size_t> d(0, outputs.size());
      const std::size_t pick = d(rng);
      run.push_back({k.original, pick == outputs.size() ? k.original : outputs[pick]});
    }
    reports.push_back(evaluate(run, base.key, base.lexicon));
  }
  for (const auto& rep : reports) {
    if (!rep.consistent()) o.fail("category counts do not add up");
    for (const auto& row : rep.rows) {
      if (row.recall() && row.precision() && *row.precision() > *row.recall()) {
        o.fail(row.name + ": precision above recall");
      }
    }
  }
  if (o.pass) o.detail = std::to_string(reports.size()) + " reports consistent, precision <= recall throughout";
  return o;
}

// ---- 11 ------------------------------------------------------------------

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome incremental_equals_batch() {
  Outcome o;
  const std::string cli = LEXREC_CLI;
  const std::string toy = std::string(LEXREC_TEST_DATA) + "/toy";
  const fs::path dir = fs::temp_directory_path() / "lexrec_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto p = [&](const std::string& n) { return (dir / n).string(); };
  const std::string quiet = " 2>>" + p("stderr.log");

  if (shell(cli + " train-od --lexicon " + toy + "/lexicon.txt --out " + p("od") + quiet) != 0 ||
      shell(cli + " train-ld --ld unigram --corpus " + toy + "/corpus.txt --vocab " + toy + "/lexicon.txt --out " +
            p("uni.ld") + quiet) != 0 ||
      shell(cli + " train-ld --ld bigram --tagged --corpus " + toy + "/corpus_tagged.txt --tagset " + toy +
            "/tagset.txt --out " + p("bi.ld") + quiet) != 0 ||
      shell(cli + " train-ld --ld bigram --untagged --corpus " + toy + "/corpus.txt --tagset " + toy +
            "/tagset.txt --out " + p("bu.ld") + quiet) != 0) {
    o.fail("training through the CLI failed");
    return o;
  }
  std::size_t compared = 0;
  for (const std::string& ld : std::vector<std::string>{"baseline", p("uni.ld"), p("bi.ld"), p("bu.ld")}) {
    for (const std::string extra : {"", " --tags", " --beam 12", " --nbest 1"}) {
      const std::string base = cli + " correct --models " + p("od") + " --ld " + ld + " --input " + toy +
                               "/input.txt" + extra;
      const int rb = shell(base + " --output " + p("batch.txt") + quiet);
      const int ri = shell(base + " --incremental --output " + p("incr.txt") + quiet);
      const std::string b = slurp(p("batch.txt")), i = slurp(p("incr.txt"));
      if (rb != ri || b != i || b.empty()) o.fail("modes differ for --ld " + ld + extra);
      ++compared;
    }
  }
  fs::remove_all(dir);
  if (o.pass) o.detail = std::to_string(compared) + " configurations byte-identical";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](const char* name, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  EvaluationReport synthetic;
  report("hmm-oracle", hmm_oracle);
  report("baum-welch-monotone", baum_welch_monotone);
  report("tp-equals-viterbi", tp_equals_viterbi);
  report("wld-oracle", wld_oracle);
  report("error-gen-arithmetic", error_gen_arithmetic);
  report("ctr-brute-force", ctr_brute_force);
  report("segmentation-demo", segmentation_demo);
  report("repair-demos", repair_demos);
  report("synthetic-end-to-end", [&] { return synthetic_end_to_end(synthetic); });
  report("evaluation-protocol", [&] { return evaluation_protocol(synthetic); });
  report("incremental-equals-batch", incremental_equals_batch);
  return failures == 0 ? 0 : 1;
}
