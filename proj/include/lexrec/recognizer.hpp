#pragma once

// Connected text recognition: the language model hypothesises word models,
// word models consume characters, exiting tokens return to the context that
// proposed them and leave Word Link Records behind. Segmentation falls out of
// the best record chain.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexrec/ld.hpp"
#include "lexrec/od.hpp"
#include "lexrec/token_passing.hpp"

namespace lexrec {

struct RecognizerConfig {
  double beam_width = kInfiniteCost;
  /// Tokens kept per state. Use at least the tag ambiguity of the vocabulary
  /// for exact results.
  std::size_t n_best = 1;
};

struct Hypothesis {
  /// Vocabulary words (no leading space).
  std::vector<std::string> words;
  std::vector<std::string> model_ids;
  /// Character count consumed after each word; the last equals the input
  /// length.
  std::vector<std::size_t> boundaries;
  /// Language model context of each word.
  std::vector<std::size_t> contexts;
  double cost = kInfiniteCost;
};

struct RecognitionStats {
  std::size_t deactivations = 0;
  /// Times a deactivated model received a token again.
  std::size_t reactivations = 0;
  std::size_t word_link_records = 0;
};

struct RecognitionResult {
  /// Distinct word sequences, cheapest first; never empty.
  std::vector<Hypothesis> alternatives;
  RecognitionStats stats;

  const Hypothesis& best() const { return alternatives.front(); }
};

/// Words of a hypothesis joined by single spaces, optionally as word/TAG.
std::string format_hypothesis(const Hypothesis& h, const LdModel& ld, bool with_tags);

class Session;

class Recognizer {
 public:
  /// Throws kInput when a lexicon word is missing from a non-baseline
  /// language model, kParameter for a bad configuration.
  Recognizer(std::shared_ptr<const Lexicon> lexicon, std::shared_ptr<const LdModel> ld,
             RecognizerConfig config = {});

  const Lexicon& lexicon() const noexcept;
  const LdModel& ld() const noexcept;
  const RecognizerConfig& config() const noexcept;

  /// Throws kInput for empty input, kNoHypothesis when no complete reading
  /// has finite cost.
  RecognitionResult recognize(std::string_view input) const;
  Session start() const;

  struct Compiled;

 private:
  std::shared_ptr<const Compiled> compiled_;
};

/// Character-incremental recognition. Feeding characters one at a time and
/// finalising gives the same result as Recognizer::recognize on the whole
/// input. A session cannot be reused after finalize().
class Session {
 public:
  explicit Session(std::shared_ptr<const Recognizer::Compiled> compiled);

  void feed(char c);
  void feed(std::string_view text);
  /// Throws kInput when nothing was fed or the session already finished,
  /// kNoHypothesis when no reading survives.
  RecognitionResult finalize();

  std::size_t length() const noexcept { return time_; }
  bool finished() const noexcept { return finished_; }
  const RecognitionStats& stats() const noexcept { return stats_; }
  /// Models currently holding tokens.
  std::size_t active_models() const noexcept;
  const WlrArena& arena() const noexcept { return arena_; }
  const LdModel& ld() const noexcept;

 private:
  void hypothesise_words();
  std::vector<Hypothesis> backtrack_alternatives() const;

  std::shared_ptr<const Recognizer::Compiled> compiled_;
  WlrArena arena_;
  std::vector<TokenNetwork> networks_;
  std::vector<bool> was_deactivated_;
  /// Tokens per language model state: [0] entry, [1..C] contexts.
  std::vector<std::vector<Token>> ld_tokens_;
  std::vector<Token> exit_tokens_;
  double previous_best_ = 0.0;
  std::size_t time_ = 0;
  bool finished_ = false;
  RecognitionStats stats_;
};

/// Walks the predecessor chain of `head` back to the root and returns the
/// words in reading order. Throws kInternal on a broken chain.
Hypothesis backtrack(const WlrArena& arena, WlrId head, double cost);

}  // namespace lexrec
