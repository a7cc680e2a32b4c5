#include "lexrec/ld.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lexrec/error.hpp"
#include "lexrec/od.hpp"

namespace lexrec {

// ---------------------------------------------------------------------------
// TagSet

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::size_t TagSet::add_tag(std::string_view name) {
  if (name.empty()) fail(ErrorKind::kInput, "empty tag name");
  if (auto it = tag_index_.find(name); it != tag_index_.end()) return it->second;
  tags_.emplace_back(name);
  tag_index_.emplace(std::string(name), tags_.size() - 1);
  return tags_.size() - 1;
}

void TagSet::add_member(std::string_view word, std::size_t tag) {
  if (tag >= tags_.size()) fail(ErrorKind::kInput, "unknown tag index");
  if (word.empty()) fail(ErrorKind::kInput, "empty word in tag set");
  auto it = word_index_.find(word);
  if (it == word_index_.end()) {
    words_.emplace_back(word);
    membership_.emplace_back();
    it = word_index_.emplace(std::string(word), static_cast<WordId>(words_.size() - 1)).first;
  }
  auto& tags = membership_[it->second];
  if (std::find(tags.begin(), tags.end(), tag) == tags.end()) {
    tags.insert(std::upper_bound(tags.begin(), tags.end(), tag), tag);
  }
}

std::optional<std::size_t> TagSet::tag_index(std::string_view name) const {
  auto it = tag_index_.find(name);
  if (it == tag_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<WordId> TagSet::word_id(std::string_view word) const {
  auto it = word_index_.find(word);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

bool TagSet::is_member(WordId word, std::size_t tag) const {
  const auto& tags = membership_.at(word);
  return std::binary_search(tags.begin(), tags.end(), tag);
}

std::size_t TagSet::max_ambiguity() const noexcept {
  std::size_t m = 0;
  for (const auto& tags : membership_) m = std::max(m, tags.size());
  return m;
}

TagSet TagSet::parse(std::istream& in) {
  TagSet ts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "tag set line " + std::to_string(lineno);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      const std::string_view name = trim(line);
      if (name.empty() || name.front() == '#') continue;
      if (name.find_first_of(" ,/") != std::string_view::npos) {
        fail(ErrorKind::kInput, where + ": malformed tag name");
      }
      ts.add_tag(name);
      continue;
    }
    const std::string word = fold_case(trim(std::string_view(line).substr(0, tab)));
    if (word.empty() || word.find(' ') != std::string::npos) {
      fail(ErrorKind::kInput, where + ": malformed word");
    }
    std::string_view rest = trim(std::string_view(line).substr(tab + 1));
    if (rest.empty()) fail(ErrorKind::kInput, where + ": word without tags");
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto comma = rest.find(',', pos);
      if (comma == std::string_view::npos) comma = rest.size();
      const std::string_view tag = trim(rest.substr(pos, comma - pos));
      if (tag.empty()) fail(ErrorKind::kInput, where + ": empty tag");
      ts.add_member(word, ts.add_tag(tag));
      pos = comma + 1;
    }
  }
  return ts;
}

TagSet TagSet::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read tag set " + path.string());
  return parse(in);
}

std::vector<TaggedSentence> parse_tagged_corpus(std::istream& in) {
  std::vector<TaggedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    TaggedSentence sentence;
    for (const std::string& tok : tokens) {
      const auto slash = tok.rfind('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == tok.size()) {
        fail(ErrorKind::kInput, "tagged corpus line " + std::to_string(lineno) +
                                    ": expected word/TAG, got '" + tok + "'");
      }
      sentence.push_back(TaggedWord{fold_case(tok.substr(0, slash)), tok.substr(slash + 1)});
    }
    out.push_back(std::move(sentence));
  }
  return out;
}

std::vector<Sentence> parse_untagged_corpus(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) {
    auto tokens = split_ws(fold_case(line));
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

// ---------------------------------------------------------------------------
// LdModel

const char* ld_kind_name(LdKind kind) noexcept {
  switch (kind) {
    case LdKind::kBaseline: return "baseline";
    case LdKind::kUnigram: return "unigram";
    case LdKind::kBigram: return "bigram";
  }
  return "?";
}

LdModel LdModel::baseline() {
  LdModel m;
  m.kind_ = LdKind::kBaseline;
  m.context_names_ = {"ANY"};
  return m;
}

LdModel::LdModel(LdKind kind, Hmm hmm, std::vector<std::string> vocabulary,
                 std::vector<std::string> context_names)
    : kind_(kind), hmm_(std::move(hmm)), vocabulary_(std::move(vocabulary)),
      context_names_(std::move(context_names)) {
  if (kind_ == LdKind::kBaseline) fail(ErrorKind::kParameter, "use LdModel::baseline()");
  if (hmm_->num_states() != context_names_.size() + 2) {
    fail(ErrorKind::kInput, "language model states do not match its contexts");
  }
  if (hmm_->alphabet_size() != vocabulary_.size()) {
    fail(ErrorKind::kInput, "language model alphabet does not match its vocabulary");
  }
  if (kind_ == LdKind::kUnigram && context_names_.size() != 1) {
    fail(ErrorKind::kInput, "unigram model must have exactly one context");
  }
  hmm_->validate();
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!word_index_.emplace(vocabulary_[i], static_cast<WordId>(i)).second) {
      fail(ErrorKind::kInput, "duplicate vocabulary word '" + vocabulary_[i] + "'");
    }
  }
}

std::optional<WordId> LdModel::word_id(std::string_view word) const {
  if (kind_ == LdKind::kBaseline) return WordId{0};
  auto it = word_index_.find(word);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LdModel::max_ambiguity() const {
  if (!hmm_) return 1;
  std::size_t best = 1;
  for (WordId w = 0; w < vocabulary_.size(); ++w) {
    std::size_t n = 0;
    for (std::size_t j = 1; j + 1 < hmm_->num_states(); ++j) n += hmm_->obs(j, w) > 0.0 ? 1 : 0;
    best = std::max(best, n);
  }
  return best;
}

double LdModel::entry_cost(std::size_t to) const {
  if (kind_ != LdKind::kBigram) return 0.0;
  return cost_of(hmm_->trans(0, to + 1));
}

double LdModel::transition_cost(std::size_t from, std::size_t to) const {
  if (kind_ != LdKind::kBigram) return 0.0;
  return cost_of(hmm_->trans(from + 1, to + 1));
}

double LdModel::exit_cost(std::size_t from) const {
  if (kind_ != LdKind::kBigram) return 0.0;
  return cost_of(hmm_->trans(from + 1, hmm_->exit()));
}

double LdModel::observation_cost(std::size_t context, WordId word) const {
  if (kind_ == LdKind::kBaseline) return 0.0;
  return cost_of(hmm_->obs(context + 1, word));
}

// ---------------------------------------------------------------------------
// Estimators

namespace {

void set_row(std::span<double> dst, const std::vector<double>& src) {
  std::copy(src.begin(), src.end(), dst.begin());
}

// Normalises counts into a distribution, or returns uniform over the eligible
// entries when there are no counts.
std::vector<double> normalise_or_uniform(std::span<const double> counts,
                                         const std::vector<bool>& eligible) {
  std::vector<double> out(counts.begin(), counts.end());
  double total = 0.0;
  for (double c : out) total += c;
  if (total > 0.0) {
    for (double& p : out) p /= total;
    return out;
  }
  std::size_t n = 0;
  for (bool e : eligible) n += e ? 1 : 0;
  if (n == 0) fail(ErrorKind::kInput, "distribution has no eligible entries");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eligible[i] ? 1.0 / static_cast<double>(n) : 0.0;
  return out;
}

// Entry row: tags only. Context rows: tags and exit.
std::vector<bool> transition_eligibility(std::size_t num_tags, bool entry_row) {
  std::vector<bool> eligible(num_tags + 1, true);
  if (entry_row) eligible.back() = false;
  return eligible;
}

std::vector<bool> membership_mask(const TagSet& tags, std::size_t tag) {
  std::vector<bool> mask(tags.words().size(), false);
  for (WordId w = 0; w < mask.size(); ++w) mask[w] = tags.is_member(w, tag);
  return mask;
}

void check_tags_have_members(const TagSet& tags) {
  if (tags.num_tags() == 0) fail(ErrorKind::kInput, "tag set has no tags");
  for (std::size_t t = 0; t < tags.num_tags(); ++t) {
    const auto mask = membership_mask(tags, t);
    if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
      fail(ErrorKind::kInput, "tag '" + tags.tags()[t] + "' has no member words");
    }
  }
}

void smooth_bigram(Hmm& hmm, const TagSet& tags, const BigramOptions& options) {
  const std::size_t c = tags.num_tags();
  for (std::size_t i = 0; i <= c; ++i) {
    set_row(hmm.trans_row(i),
            smooth_additive(hmm.trans_row(i), options.eps_trans, transition_eligibility(c, i == 0)));
  }
  for (std::size_t t = 0; t < c; ++t) {
    set_row(hmm.obs_row(t + 1), smooth_additive(hmm.obs_row(t + 1), options.eps_obs, membership_mask(tags, t)));
  }
}

}  // namespace

LdModel build_unigram(std::span<const Sentence> corpus, std::span<const std::string> vocabulary,
                      const UnigramOptions& options) {
  if (vocabulary.empty()) fail(ErrorKind::kInput, "empty vocabulary");
  std::map<std::string, WordId, std::less<>> index;
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    if (!index.emplace(vocabulary[i], static_cast<WordId>(i)).second) {
      fail(ErrorKind::kInput, "duplicate vocabulary word '" + vocabulary[i] + "'");
    }
  }
  std::vector<double> counts(vocabulary.size(), 0.0);
  double tokens = 0.0;
  double sentences = 0.0;
  for (const Sentence& s : corpus) {
    if (s.empty()) continue;
    sentences += 1.0;
    for (const std::string& w : s) {
      auto it = index.find(w);
      if (it == index.end()) fail(ErrorKind::kInput, "corpus word '" + w + "' is not in the vocabulary");
      counts[it->second] += 1.0;
      tokens += 1.0;
    }
  }
  if (tokens == 0.0) fail(ErrorKind::kTraining, "empty unigram training corpus");

  Hmm hmm(3, vocabulary.size());
  hmm.set_trans(0, 1, 1.0);
  const double end = sentences / tokens;
  const std::vector<double> row{1.0 - end, end};
  set_row(hmm.trans_row(1), smooth_additive(row, options.eps_trans));
  for (double& c : counts) c /= tokens;
  set_row(hmm.obs_row(1), smooth_additive(counts, options.eps_obs));
  return LdModel(LdKind::kUnigram, std::move(hmm),
                 std::vector<std::string>(vocabulary.begin(), vocabulary.end()), {"ANY"});
}

LdModel build_bigram_supervised(std::span<const TaggedSentence> corpus, const TagSet& tags,
                                const BigramOptions& options) {
  check_tags_have_members(tags);
  const std::size_t c = tags.num_tags();
  const std::size_t v = tags.words().size();
  Matrix trans_counts(c + 1, c + 1);  // rows: entry, tags; cols: tags, exit
  Matrix obs_counts(c, v);
  std::size_t used = 0;

  for (const TaggedSentence& s : corpus) {
    if (s.empty()) continue;
    ++used;
    std::size_t prev = 0;  // entry
    for (const TaggedWord& tw : s) {
      const auto tag = tags.tag_index(tw.tag);
      if (!tag) fail(ErrorKind::kInput, "corpus tag '" + tw.tag + "' is not in the tag set");
      const auto word = tags.word_id(tw.word);
      if (!word) fail(ErrorKind::kInput, "corpus word '" + tw.word + "' is not in the tag set");
      if (!tags.is_member(*word, *tag)) {
        fail(ErrorKind::kInput, "word '" + tw.word + "' is not a member of tag '" + tw.tag + "'");
      }
      trans_counts(prev, *tag) += 1.0;
      obs_counts(*tag, *word) += 1.0;
      prev = *tag + 1;
    }
    trans_counts(prev, c) += 1.0;
  }
  if (used == 0) fail(ErrorKind::kTraining, "empty tagged corpus");

  Hmm hmm(c + 2, v);
  for (std::size_t i = 0; i <= c; ++i) {
    set_row(hmm.trans_row(i), normalise_or_uniform(trans_counts.row(i), transition_eligibility(c, i == 0)));
  }
  for (std::size_t t = 0; t < c; ++t) {
    set_row(hmm.obs_row(t + 1), normalise_or_uniform(obs_counts.row(t), membership_mask(tags, t)));
  }
  smooth_bigram(hmm, tags, options);
  return LdModel(LdKind::kBigram, std::move(hmm), tags.words(), tags.tags());
}

Hmm bigram_uniform_start(const TagSet& tags) {
  check_tags_have_members(tags);
  const std::size_t c = tags.num_tags();
  const std::size_t v = tags.words().size();
  Hmm hmm(c + 2, v);
  const std::vector<double> none(c + 1, 0.0);
  for (std::size_t i = 0; i <= c; ++i) {
    set_row(hmm.trans_row(i), normalise_or_uniform(none, transition_eligibility(c, i == 0)));
  }
  const std::vector<double> zeros(v, 0.0);
  for (std::size_t t = 0; t < c; ++t) {
    set_row(hmm.obs_row(t + 1), normalise_or_uniform(zeros, membership_mask(tags, t)));
  }
  return hmm;
}

LdModel build_bigram_unsupervised(std::span<const Sentence> corpus, const TagSet& tags,
                                  const BigramOptions& options,
                                  std::vector<double>* log_likelihood) {
  Hmm start = bigram_uniform_start(tags);
  std::vector<ObservationSequence> sequences;
  for (const Sentence& s : corpus) {
    if (s.empty()) continue;
    ObservationSequence seq;
    for (const std::string& w : s) {
      const auto id = tags.word_id(w);
      if (!id) fail(ErrorKind::kInput, "corpus word '" + w + "' has no tag membership");
      seq.push_back(*id);
    }
    sequences.push_back(std::move(seq));
  }
  if (sequences.empty()) fail(ErrorKind::kTraining, "empty training corpus");
  TrainingResult trained = baum_welch_multi(start, sequences, options.training);
  if (log_likelihood) *log_likelihood = trained.log_likelihood;
  Hmm hmm = std::move(trained.model);
  smooth_bigram(hmm, tags, options);
  return LdModel(LdKind::kBigram, std::move(hmm), tags.words(), tags.tags());
}

// ---------------------------------------------------------------------------
// Serialisation

namespace {
constexpr const char* kLdTag = "LEXREC-LD";
}

void write_ld(std::ostream& out, const LdModel& model) {
  out << kLdTag << " 1\n";
  out << "kind " << ld_kind_name(model.kind()) << '\n';
  out << "contexts " << model.num_contexts() << '\n';
  for (const auto& name : model.context_names()) out << escape_symbol(name) << '\n';
  if (model.hmm()) write_hmm(out, *model.hmm(), model.vocabulary());
}

LdModel read_ld(std::istream& in) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != kLdTag || version != 1) fail(ErrorKind::kInput, "not a language model file");
  std::string key;
  std::string kind;
  std::size_t contexts = 0;
  in >> key >> kind;
  if (key != "kind") fail(ErrorKind::kInput, "language model file: expected kind");
  in >> key >> contexts;
  if (key != "contexts" || !in) fail(ErrorKind::kInput, "language model file: expected contexts");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < contexts; ++i) {
    std::string tok;
    if (!(in >> tok)) fail(ErrorKind::kInput, "language model file: truncated context list");
    names.push_back(unescape_symbol(tok));
  }
  if (kind == "baseline") return LdModel::baseline();
  LdKind k;
  if (kind == "unigram") {
    k = LdKind::kUnigram;
  } else if (kind == "bigram") {
    k = LdKind::kBigram;
  } else {
    fail(ErrorKind::kInput, "unknown language model kind '" + kind + "'");
  }
  HmmFile hf = read_hmm(in);
  return LdModel(k, std::move(hf.hmm), std::move(hf.symbols), std::move(names));
}

void save_ld(const LdModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  write_ld(out, model);
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

LdModel load_ld(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path.string());
  return read_ld(in);
}

}  // namespace lexrec
