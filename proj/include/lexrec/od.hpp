#pragma once

// Orthographic decoder: character alphabet, left-to-right word models, the
// trained lexicon and isolated word recognition.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexrec/error_gen.hpp"
#include "lexrec/hmm.hpp"
#include "lexrec/token_passing.hpp"

namespace lexrec {

/// ASCII lower-casing; other bytes pass through.
char fold_case(char c) noexcept;
std::string fold_case(std::string_view text);

/// Ordered character set. The space is always symbol 0 and the last symbol is
/// a reserved UNK that stands for every character outside the set.
class CharacterAlphabet {
 public:
  /// Space, a-z, 0-9 and common punctuation.
  static CharacterAlphabet standard();

  /// Space is added in front if missing. Throws kParameter on duplicates or
  /// upper-case letters.
  explicit CharacterAlphabet(std::string_view characters);

  /// Number of symbols, UNK included.
  std::size_t size() const noexcept { return chars_.size() + 1; }
  Symbol space() const noexcept { return 0; }
  Symbol unk() const noexcept { return static_cast<Symbol>(chars_.size()); }
  const std::string& characters() const noexcept { return chars_; }

  /// Symbol of the case-folded character, if it belongs to the set.
  std::optional<Symbol> find(char c) const noexcept;
  /// Case-folds and maps unknown characters to UNK.
  ObservationSequence encode(std::string_view text) const;
  /// Like encode but throws kInput on a character outside the set.
  ObservationSequence encode_strict(std::string_view text) const;

  /// One printable name per symbol ("<unk>" for UNK), for model files.
  std::vector<std::string> symbol_names() const;
  /// Inverse of symbol_names(); throws kInput when the table is malformed.
  static CharacterAlphabet from_symbol_names(std::span<const std::string> names);

  bool operator==(const CharacterAlphabet&) const = default;

 private:
  std::string chars_;
  std::vector<int> index_;  // 256 entries, -1 for characters outside the set
};

struct WordModelOptions {
  bool with_space_state = true;
  std::size_t delta = 2;
};

class WordModel {
 public:
  WordModel(std::string word, Hmm hmm, bool space_state, std::size_t delta);

  /// The vocabulary word, without any leading space.
  const std::string& word() const noexcept { return word_; }
  /// " word" for space-state models, otherwise the word itself.
  const std::string& model_id() const noexcept { return model_id_; }
  bool has_space_state() const noexcept { return space_state_; }
  std::size_t delta() const noexcept { return delta_; }
  const Hmm& hmm() const noexcept { return hmm_; }
  /// -log view of hmm(), shared by every network built from this model.
  const std::shared_ptr<const CostModel>& costs() const noexcept { return costs_; }

  /// True when a_{ij} may be non-zero in this topology.
  bool allowed_transition(std::size_t from, std::size_t to) const noexcept;

 private:
  std::string word_;
  std::string model_id_;
  Hmm hmm_;
  bool space_state_;
  std::size_t delta_;
  std::shared_ptr<const CostModel> costs_;
};

/// Untrained left-to-right model with self-loops and skips up to `delta`;
/// observation rows put 0.9 on the state's own character. Throws kInput for an
/// empty word or a character outside the alphabet, kParameter for delta < 1.
WordModel build_word_model(std::string_view word, const CharacterAlphabet& alphabet,
                           const WordModelOptions& options = {});

/// Baum-Welch over the corpus, then additive smoothing of every observation
/// row with `eps_obs`. Throws kInput for corpus strings outside the alphabet.
WordModel train_word_model(const WordModel& model, std::span<const std::string> corpus,
                           const CharacterAlphabet& alphabet, double eps_obs,
                           const TrainingOptions& training = {});

struct LexiconEntry {
  std::string word;
  /// Punctuation or number word trained on white-space corruptions only.
  bool space_only = false;
};

/// One word per line with an optional "#special:space-only" suffix. Blank
/// lines are skipped; words are case-folded. Throws kInput on duplicates,
/// embedded white space or reserved "<name>" ids.
std::vector<LexiconEntry> parse_lexicon(std::istream& in);
std::vector<LexiconEntry> read_lexicon_file(const std::filesystem::path& path);

class Lexicon {
 public:
  Lexicon(CharacterAlphabet alphabet, std::vector<WordModel> models,
          std::vector<bool> space_only);

  const CharacterAlphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t size() const noexcept { return models_.size(); }
  const WordModel& model(std::size_t i) const { return models_.at(i); }
  bool space_only(std::size_t i) const { return space_only_.at(i); }
  std::optional<std::size_t> find(std::string_view word) const;
  std::vector<std::string> words() const;

 private:
  CharacterAlphabet alphabet_;
  std::vector<WordModel> models_;
  std::vector<bool> space_only_;
};

struct OdTrainingOptions {
  WordModelOptions model;
  double eps_obs = 1e-4;
  ErrorFunctions functions = kDefaultTrainingFunctions;
  bool filter_real_words = true;
  KeyboardLayout keyboard = KeyboardLayout::qwerty();
  TrainingOptions training;
};

/// The error corpus a word model is trained on, before the pristine form is
/// added.
ErrorCorpus training_corpus(const LexiconEntry& entry, const std::set<std::string>& vocabulary,
                            const OdTrainingOptions& options);

Lexicon train_lexicon(std::span<const LexiconEntry> entries, const CharacterAlphabet& alphabet,
                      const OdTrainingOptions& options = {});

struct IsolatedResult {
  std::size_t index = 0;
  std::string word;
  double cost = kInfiniteCost;
};

/// Isolated word recognition with beam search. A model that falls outside the
/// beam stays deactivated. Ties go to the smallest model id. Throws kInput for
/// empty input and kNoHypothesis when no model reaches its exit state.
IsolatedResult best_word_isolated(const Lexicon& lexicon, std::string_view input,
                                  double beam = kInfiniteCost);

/// Directory with "manifest.txt" and one model file per word.
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& dir);
Lexicon load_lexicon(const std::filesystem::path& dir);

}  // namespace lexrec
