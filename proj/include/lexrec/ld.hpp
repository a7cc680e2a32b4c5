#pragma once

// Linguistic decoder: language models realised as HMMs whose observables are
// vocabulary word ids. One context state for the unigram model, one per tag
// for the tag bigram.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexrec/hmm.hpp"

namespace lexrec {

using WordId = std::uint32_t;

/// Tag names plus the tags every vocabulary word may carry.
class TagSet {
 public:
  TagSet() = default;

  /// `TAG` lines declare tags, `word<TAB>TAG[,TAG...]` lines give membership.
  /// Tags used in membership lines are declared implicitly. Throws kInput.
  static TagSet parse(std::istream& in);
  static TagSet read_file(const std::filesystem::path& path);

  std::size_t add_tag(std::string_view name);
  void add_member(std::string_view word, std::size_t tag);

  std::size_t num_tags() const noexcept { return tags_.size(); }
  const std::vector<std::string>& tags() const noexcept { return tags_; }
  std::optional<std::size_t> tag_index(std::string_view name) const;

  /// Vocabulary in order of first appearance.
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::optional<WordId> word_id(std::string_view word) const;
  /// Tags of a word, ascending.
  const std::vector<std::size_t>& membership(WordId word) const { return membership_.at(word); }
  bool is_member(WordId word, std::size_t tag) const;
  std::size_t max_ambiguity() const noexcept;

 private:
  std::vector<std::string> tags_;
  std::map<std::string, std::size_t, std::less<>> tag_index_;
  std::vector<std::string> words_;
  std::map<std::string, WordId, std::less<>> word_index_;
  std::vector<std::vector<std::size_t>> membership_;
};

struct TaggedWord {
  std::string word;
  std::string tag;
};
using TaggedSentence = std::vector<TaggedWord>;
using Sentence = std::vector<std::string>;

/// One sentence per line, `word/TAG` tokens split at the last '/'. Words are
/// case-folded. Throws kInput on malformed tokens.
std::vector<TaggedSentence> parse_tagged_corpus(std::istream& in);
/// One sentence per line, white-space separated, case-folded.
std::vector<Sentence> parse_untagged_corpus(std::istream& in);

enum class LdKind { kBaseline, kUnigram, kBigram };
const char* ld_kind_name(LdKind kind) noexcept;

class LdModel {
 public:
  /// Single context, every cost zero, no vocabulary restriction.
  static LdModel baseline();
  /// `hmm` has one emitting state per context and one symbol per word.
  LdModel(LdKind kind, Hmm hmm, std::vector<std::string> vocabulary,
          std::vector<std::string> context_names);

  LdKind kind() const noexcept { return kind_; }
  std::size_t num_contexts() const noexcept { return context_names_.size(); }
  const std::vector<std::string>& context_names() const noexcept { return context_names_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  /// Empty for the baseline.
  const std::optional<Hmm>& hmm() const noexcept { return hmm_; }
  /// Largest number of contexts in which one word has non-zero probability.
  std::size_t max_ambiguity() const;
  /// Baseline: every word is accepted and gets id 0.
  std::optional<WordId> word_id(std::string_view word) const;

  // Costs over context indices 0..C-1. The unigram model scores words only:
  // its transition costs are zero.
  double entry_cost(std::size_t to) const;
  double transition_cost(std::size_t from, std::size_t to) const;
  double exit_cost(std::size_t from) const;
  double observation_cost(std::size_t context, WordId word) const;

 private:
  LdModel() = default;

  LdKind kind_ = LdKind::kBaseline;
  std::optional<Hmm> hmm_;
  std::vector<std::string> vocabulary_;
  std::map<std::string, WordId, std::less<>> word_index_;
  std::vector<std::string> context_names_;
};

struct UnigramOptions {
  double eps_obs = 1e-4;
  double eps_trans = 1e-4;
};

/// Relative word frequencies smoothed over the vocabulary. The transitions
/// hold the estimated sentence-end probability (not used in decoding). Throws
/// kTraining for an empty corpus, kInput for out-of-vocabulary words.
LdModel build_unigram(std::span<const Sentence> corpus, std::span<const std::string> vocabulary,
                      const UnigramOptions& options = {});

struct BigramOptions {
  double eps_trans = 1e-3;
  double eps_obs = 1e-3;
  TrainingOptions training;
};

/// Counts over a tagged corpus. Tags that never occur get uniform rows.
/// Throws kInput when a (word, tag) pair contradicts the tag set.
LdModel build_bigram_supervised(std::span<const TaggedSentence> corpus, const TagSet& tags,
                                const BigramOptions& options = {});

/// Membership-constrained uniform start, Baum-Welch over word-id sequences,
/// then smoothing. `log_likelihood` receives the per-iteration corpus
/// log-likelihood when non-null.
LdModel build_bigram_unsupervised(std::span<const Sentence> corpus, const TagSet& tags,
                                  const BigramOptions& options = {},
                                  std::vector<double>* log_likelihood = nullptr);

/// Initial model used by build_bigram_unsupervised.
Hmm bigram_uniform_start(const TagSet& tags);

void write_ld(std::ostream& out, const LdModel& model);
LdModel read_ld(std::istream& in);
void save_ld(const LdModel& model, const std::filesystem::path& path);
LdModel load_ld(const std::filesystem::path& path);

}  // namespace lexrec
