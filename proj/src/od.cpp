#include "lexrec/od.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "lexrec/error.hpp"

namespace lexrec {

char fold_case(char c) noexcept { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string fold_case(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = fold_case(c);
  return out;
}

// ---------------------------------------------------------------------------
// CharacterAlphabet

CharacterAlphabet CharacterAlphabet::standard() {
  return CharacterAlphabet(" abcdefghijklmnopqrstuvwxyz0123456789.,;:!?'\"-()/&%$+*=@#");
}

CharacterAlphabet::CharacterAlphabet(std::string_view characters) : index_(256, -1) {
  // Space first, the rest in the given order.
  chars_.push_back(' ');
  for (char c : characters) {
    if (c != ' ') chars_.push_back(c);
  }
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    const auto c = static_cast<unsigned char>(chars_[i]);
    if (chars_[i] >= 'A' && chars_[i] <= 'Z') {
      fail(ErrorKind::kParameter, "alphabet must not contain upper-case letters");
    }
    if (index_[c] != -1) fail(ErrorKind::kParameter, "duplicate character in alphabet");
    index_[c] = static_cast<int>(i);
  }
}

std::optional<Symbol> CharacterAlphabet::find(char c) const noexcept {
  const int i = index_[static_cast<unsigned char>(fold_case(c))];
  if (i < 0) return std::nullopt;
  return static_cast<Symbol>(i);
}

ObservationSequence CharacterAlphabet::encode(std::string_view text) const {
  ObservationSequence out;
  out.reserve(text.size());
  for (char c : text) out.push_back(find(c).value_or(unk()));
  return out;
}

ObservationSequence CharacterAlphabet::encode_strict(std::string_view text) const {
  ObservationSequence out;
  out.reserve(text.size());
  for (char c : text) {
    const auto s = find(c);
    if (!s) fail(ErrorKind::kInput, std::string("character '") + c + "' is not in the alphabet");
    out.push_back(*s);
  }
  return out;
}

std::vector<std::string> CharacterAlphabet::symbol_names() const {
  std::vector<std::string> out;
  for (char c : chars_) out.emplace_back(1, c);
  out.emplace_back("<unk>");
  return out;
}

CharacterAlphabet CharacterAlphabet::from_symbol_names(std::span<const std::string> names) {
  if (names.size() < 2 || names.back() != "<unk>") {
    fail(ErrorKind::kInput, "symbol table must end with <unk>");
  }
  std::string chars;
  for (std::size_t i = 0; i + 1 < names.size(); ++i) {
    if (names[i].size() != 1) fail(ErrorKind::kInput, "symbol '" + names[i] + "' is not a character");
    chars += names[i];
  }
  if (chars.front() != ' ') fail(ErrorKind::kInput, "space must be the first symbol");
  return CharacterAlphabet(chars);
}

// ---------------------------------------------------------------------------
// Word models

namespace {

std::size_t emitting_count(std::string_view word, bool space_state) {
  return word.size() + (space_state ? 1 : 0);
}

bool topology_allows(std::size_t from, std::size_t to, std::size_t num_states,
                     std::size_t delta, bool space_state) {
  const std::size_t exit = num_states - 1;
  if (from >= exit || to == 0 || to > exit) return false;
  if (from == 0) {
    if (to == exit) return false;  // no empty word
    if (space_state && to == 2) return true;
    return to <= delta;
  }
  return to >= from && to <= from + delta;
}

}  // namespace

WordModel::WordModel(std::string word, Hmm hmm, bool space_state, std::size_t delta)
    : word_(std::move(word)),
      model_id_(space_state ? " " + word_ : word_),
      hmm_(std::move(hmm)),
      space_state_(space_state),
      delta_(delta) {
  if (word_.empty()) fail(ErrorKind::kInput, "word model needs a non-empty word");
  if (hmm_.num_states() != emitting_count(word_, space_state_) + 2) {
    fail(ErrorKind::kInput, "model for '" + word_ + "' has the wrong number of states");
  }
  costs_ = std::make_shared<const CostModel>(hmm_);
}

bool WordModel::allowed_transition(std::size_t from, std::size_t to) const noexcept {
  return topology_allows(from, to, hmm_.num_states(), delta_, space_state_);
}

WordModel build_word_model(std::string_view word, const CharacterAlphabet& alphabet,
                           const WordModelOptions& options) {
  if (word.empty()) fail(ErrorKind::kInput, "cannot build a model for an empty word");
  if (options.delta < 1) fail(ErrorKind::kParameter, "skip bound must be at least 1");
  const std::string folded = fold_case(word);
  const std::string spelled = options.with_space_state ? " " + folded : folded;
  const ObservationSequence symbols = alphabet.encode_strict(spelled);

  const std::size_t m = spelled.size();
  const std::size_t n = m + 2;
  Hmm hmm(n, alphabet.size());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::vector<std::size_t> skips;
    double total = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      if (!topology_allows(i, j, n, options.delta, options.with_space_state)) continue;
      if (j == i) {
        hmm.set_trans(i, j, 0.1);
      } else if (j == i + 1) {
        hmm.set_trans(i, j, 0.8);
      } else {
        skips.push_back(j);
      }
    }
    for (std::size_t j : skips) hmm.set_trans(i, j, 0.1 / static_cast<double>(skips.size()));
    for (double p : hmm.trans_row(i)) total += p;
    for (double& p : hmm.trans_row(i)) p /= total;
  }
  const double rest = 0.1 / static_cast<double>(alphabet.size() - 1);
  for (std::size_t j = 1; j <= m; ++j) {
    for (Symbol k = 0; k < alphabet.size(); ++k) {
      hmm.set_obs(j, k, k == symbols[j - 1] ? 0.9 : rest);
    }
  }
  return WordModel(folded, std::move(hmm), options.with_space_state, options.delta);
}

WordModel train_word_model(const WordModel& model, std::span<const std::string> corpus,
                           const CharacterAlphabet& alphabet, double eps_obs,
                           const TrainingOptions& training) {
  if (alphabet.size() != model.hmm().alphabet_size()) {
    fail(ErrorKind::kParameter, "alphabet does not match the word model");
  }
  std::vector<ObservationSequence> sequences;
  sequences.reserve(corpus.size());
  for (const std::string& s : corpus) {
    if (s.empty()) continue;
    sequences.push_back(alphabet.encode_strict(s));
  }
  if (sequences.empty()) fail(ErrorKind::kTraining, "empty training corpus for '" + model.word() + "'");
  TrainingResult trained = baum_welch_multi(model.hmm(), sequences, training);
  Hmm hmm = std::move(trained.model);
  for (std::size_t j = 1; j + 1 < hmm.num_states(); ++j) {
    const std::vector<double> row = smooth_additive(hmm.obs_row(j), eps_obs);
    std::copy(row.begin(), row.end(), hmm.obs_row(j).begin());
  }
  return WordModel(model.word(), std::move(hmm), model.has_space_state(), model.delta());
}

// ---------------------------------------------------------------------------
// Lexicon

namespace {

constexpr std::string_view kSpaceOnlySuffix = "#special:space-only";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_reserved_id(std::string_view word) {
  return word.size() >= 2 && word.front() == '<' && word.back() == '>';
}

}  // namespace

std::vector<LexiconEntry> parse_lexicon(std::istream& in) {
  std::vector<LexiconEntry> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = trim(line);
    if (body.empty()) continue;
    LexiconEntry entry;
    if (body.size() > kSpaceOnlySuffix.size() && body.ends_with(kSpaceOnlySuffix)) {
      body = trim(body.substr(0, body.size() - kSpaceOnlySuffix.size()));
      entry.space_only = true;
    }
    const std::string where = "lexicon line " + std::to_string(lineno);
    if (body.empty()) fail(ErrorKind::kInput, where + ": missing word");
    if (body.find_first_of(" \t") != std::string_view::npos) {
      fail(ErrorKind::kInput, where + ": word contains white space");
    }
    if (is_reserved_id(body)) {
      fail(ErrorKind::kInput, where + ": ids of the form <name> are reserved for word groups");
    }
    entry.word = fold_case(body);
    if (!seen.insert(entry.word).second) {
      fail(ErrorKind::kInput, where + ": duplicate word '" + entry.word + "'");
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<LexiconEntry> read_lexicon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read lexicon file " + path.string());
  return parse_lexicon(in);
}

Lexicon::Lexicon(CharacterAlphabet alphabet, std::vector<WordModel> models,
                 std::vector<bool> space_only)
    : alphabet_(std::move(alphabet)), models_(std::move(models)), space_only_(std::move(space_only)) {
  if (space_only_.size() != models_.size()) {
    fail(ErrorKind::kParameter, "special-word flags do not match the models");
  }
  std::set<std::string> ids;
  for (const WordModel& m : models_) {
    if (m.hmm().alphabet_size() != alphabet_.size()) {
      fail(ErrorKind::kInput, "model '" + m.word() + "' uses a different alphabet");
    }
    if (!ids.insert(m.model_id()).second) {
      fail(ErrorKind::kInput, "duplicate model id '" + m.model_id() + "'");
    }
  }
}

std::optional<std::size_t> Lexicon::find(std::string_view word) const {
  for (std::size_t i = 0; i < models_.size(); ++i) {
    if (models_[i].word() == word) return i;
  }
  return std::nullopt;
}

std::vector<std::string> Lexicon::words() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const WordModel& m : models_) out.push_back(m.word());
  return out;
}

ErrorCorpus training_corpus(const LexiconEntry& entry, const std::set<std::string>& vocabulary,
                            const OdTrainingOptions& options) {
  const std::string spelled = options.model.with_space_state ? " " + entry.word : entry.word;
  if (entry.space_only) return build_space_only_corpus(spelled);
  ErrorCorpus corpus = build_error_corpus(spelled, options.functions, options.keyboard);
  if (options.filter_real_words) corpus = filter_real_words(corpus, vocabulary);
  return corpus;
}

Lexicon train_lexicon(std::span<const LexiconEntry> entries, const CharacterAlphabet& alphabet,
                      const OdTrainingOptions& options) {
  std::set<std::string> vocabulary;
  for (const LexiconEntry& e : entries) vocabulary.insert(e.word);
  std::vector<WordModel> models;
  std::vector<bool> special;
  models.reserve(entries.size());
  for (const LexiconEntry& e : entries) {
    const WordModel initial = build_word_model(e.word, alphabet, options.model);
    const ErrorCorpus corpus = training_corpus(e, vocabulary, options);
    // Corruptions may contain characters the alphabet lacks (keyboard layouts
    // with extra keys); those strings cannot be emitted and are left out.
    std::vector<std::string> strings;
    for (std::string& s : corpus.training_strings()) {
      const bool ok = std::all_of(s.begin(), s.end(), [&](char c) { return alphabet.find(c).has_value(); });
      if (ok) strings.push_back(std::move(s));
    }
    models.push_back(train_word_model(initial, strings, alphabet, options.eps_obs, options.training));
    special.push_back(e.space_only);
  }
  return Lexicon(alphabet, std::move(models), std::move(special));
}

// ---------------------------------------------------------------------------
// Isolated word recognition

IsolatedResult best_word_isolated(const Lexicon& lexicon, std::string_view input, double beam) {
  if (input.empty()) fail(ErrorKind::kInput, "empty input");
  if (!(beam >= 0.0)) fail(ErrorKind::kParameter, "beam width must be non-negative");
  if (lexicon.size() == 0) fail(ErrorKind::kNoHypothesis, "empty lexicon");
  const ObservationSequence symbols = lexicon.alphabet().encode(input);

  std::vector<TokenNetwork> networks;
  networks.reserve(lexicon.size());
  for (std::size_t m = 0; m < lexicon.size(); ++m) {
    networks.emplace_back(lexicon.model(m).costs(), lexicon.model(m).model_id());
    networks.back().enter(Token::start());
  }
  for (Symbol c : symbols) {
    double global_best = kInfiniteCost;
    for (TokenNetwork& net : networks) {
      if (!net.active()) continue;
      net.step(c);
      global_best = std::min(global_best, net.best_cost());
    }
    beam_prune(networks, global_best, beam);
  }

  IsolatedResult best;
  bool found = false;
  for (std::size_t m = 0; m < networks.size(); ++m) {
    const auto exits = networks[m].exit_tokens();
    if (!networks[m].active() || exits.empty()) continue;
    const double cost = exits.front().cost;
    const bool better = !found || cost < best.cost ||
                        (cost == best.cost && lexicon.model(m).model_id() < lexicon.model(best.index).model_id());
    if (better) {
      best = IsolatedResult{m, lexicon.model(m).word(), cost};
      found = true;
    }
  }
  if (!found) fail(ErrorKind::kNoHypothesis, "no word model accepts the input");
  return best;
}

// ---------------------------------------------------------------------------
// Archive

namespace {

constexpr const char* kManifestTag = "LEXREC-LEXICON";

std::string model_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "w%05zu.hmm", i);
  return buf;
}

}  // namespace

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  const std::vector<std::string> names = lexicon.alphabet().symbol_names();

  std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
  if (!manifest) fail(ErrorKind::kIo, "cannot write manifest in " + dir.string());
  manifest << kManifestTag << " 1\n";
  manifest << "alphabet " << escape_symbol(lexicon.alphabet().characters()) << '\n';
  manifest << "models " << lexicon.size() << '\n';
  for (std::size_t i = 0; i < lexicon.size(); ++i) {
    const WordModel& m = lexicon.model(i);
    const std::string file = model_file_name(i);
    manifest << file << ' ' << (m.has_space_state() ? 1 : 0) << ' ' << m.delta() << ' '
             << (lexicon.space_only(i) ? 1 : 0) << ' ' << escape_symbol(m.word()) << '\n';
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write " + (dir / file).string());
    write_hmm(out, m.hmm(), names);
    if (!out) fail(ErrorKind::kIo, "write failed for " + (dir / file).string());
  }
  manifest << "end\n";
  if (!manifest) fail(ErrorKind::kIo, "write failed for manifest in " + dir.string());
}

Lexicon load_lexicon(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) fail(ErrorKind::kIo, "cannot read manifest in " + dir.string());
  std::string tag;
  int version = 0;
  manifest >> tag >> version;
  if (tag != kManifestTag || version != 1) fail(ErrorKind::kInput, "not a lexicon manifest");
  std::string key;
  std::string alphabet_token;
  std::size_t count = 0;
  manifest >> key >> alphabet_token;
  if (key != "alphabet") fail(ErrorKind::kInput, "manifest: expected alphabet");
  manifest >> key >> count;
  if (key != "models" || !manifest) fail(ErrorKind::kInput, "manifest: expected model count");
  CharacterAlphabet alphabet(unescape_symbol(alphabet_token));
  const std::vector<std::string> names = alphabet.symbol_names();

  std::vector<WordModel> models;
  std::vector<bool> special;
  for (std::size_t i = 0; i < count; ++i) {
    std::string file;
    int space_state = 0;
    std::size_t delta = 0;
    int space_only = 0;
    std::string word_token;
    manifest >> file >> space_state >> delta >> space_only >> word_token;
    if (!manifest) fail(ErrorKind::kInput, "manifest: truncated model list");
    const std::string word = unescape_symbol(word_token);
    if (is_reserved_id(word)) {
      fail(ErrorKind::kInput, "word-group model '" + word + "' is not supported");
    }
    if (file.find('/') != std::string::npos || file.find("..") != std::string::npos) {
      fail(ErrorKind::kInput, "manifest: bad model file name '" + file + "'");
    }
    std::ifstream in(dir / file);
    if (!in) fail(ErrorKind::kIo, "cannot read " + (dir / file).string());
    HmmFile hf = read_hmm(in);
    if (hf.symbols != names) fail(ErrorKind::kInput, file + ": symbol table differs from the manifest");
    models.emplace_back(word, std::move(hf.hmm), space_state != 0, delta);
    special.push_back(space_only != 0);
  }
  manifest >> key;
  if (key != "end") fail(ErrorKind::kInput, "manifest: missing end marker");
  return Lexicon(std::move(alphabet), std::move(models), std::move(special));
}

}  // namespace lexrec
