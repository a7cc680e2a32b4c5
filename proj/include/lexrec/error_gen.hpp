#pragma once

// Synthetic error corpora for training word models: the six error-generating
// functions and the real-word filter.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace lexrec {

/// Immediate left/right key neighbours per character.
class KeyboardLayout {
 public:
  KeyboardLayout() = default;

  /// US QWERTY letter rows.
  static KeyboardLayout qwerty();
  /// Parses `char<TAB>neighbours` lines; '#' starts a comment line. Throws
  /// kInput for malformed lines, more than two neighbours or an asymmetric
  /// relation.
  static KeyboardLayout parse(std::istream& in);

  std::string_view neighbors(char c) const;
  void set_neighbors(char c, std::string neighbors);
  const std::map<char, std::string>& table() const noexcept { return table_; }

 private:
  std::map<char, std::string> table_;
};

enum ErrorFunction : unsigned {
  kDeletion = 1u << 0,
  kInsertion = 1u << 1,
  kSubstitution = 1u << 2,
  kTransposition = 1u << 3,
  kSpaceInsertion = 1u << 4,
  kDoubleStroke = 1u << 5,
};
using ErrorFunctions = unsigned;

/// Training recipe used by default: deletion, substitution, white-space
/// insertion.
inline constexpr ErrorFunctions kDefaultTrainingFunctions =
    kDeletion | kSubstitution | kSpaceInsertion;
inline constexpr ErrorFunctions kAllErrorFunctions = 0x3f;

const char* error_function_tag(ErrorFunction f) noexcept;
/// Parses a comma list of tags ("del,sub,space"); throws kParameter.
ErrorFunctions parse_error_functions(std::string_view list);

// Raw generators: one output per position (or per position and neighbour),
// duplicates and empty strings included. A leading space on the word counts
// as an ordinary character, except for white-space insertion which only uses
// interior positions of the word body.
std::vector<std::string> gen_deletions(std::string_view word);
std::vector<std::string> gen_insertions(std::string_view word, const KeyboardLayout& kb);
std::vector<std::string> gen_substitutions(std::string_view word, const KeyboardLayout& kb);
std::vector<std::string> gen_transpositions(std::string_view word);
std::vector<std::string> gen_space_insertions(std::string_view word);
std::vector<std::string> gen_double_strokes(std::string_view word);

// Full-alphabet variants (every alphabet character instead of neighbours).
std::vector<std::string> gen_insertions_full(std::string_view word, std::string_view alphabet);
std::vector<std::string> gen_substitutions_full(std::string_view word, std::string_view alphabet);

/// Peterson's count of single-error misspellings of an n-letter word:
/// n deletions, A(n+1) insertions, (A-1)n substitutions, n-1 transpositions.
long long count_single_error_candidates(long long n, long long alphabet_size = 28);

struct Corruption {
  std::string text;
  ErrorFunction op;
};

struct ErrorCorpus {
  std::string source;
  /// Distinct, non-empty and different from `source`.
  std::vector<Corruption> corruptions;

  /// Source first, then every corruption.
  std::vector<std::string> training_strings() const;
};

/// Runs the selected functions over `word` and deduplicates, keeping the first
/// operator that produced a string.
ErrorCorpus build_error_corpus(std::string_view word, ErrorFunctions functions,
                               const KeyboardLayout& kb);

/// Corpus of a punctuation or number word: leading-space deletion plus
/// white-space insertions.
ErrorCorpus build_space_only_corpus(std::string_view word);

/// Removes corruptions that, ignoring a leading space, spell another
/// vocabulary word.
ErrorCorpus filter_real_words(const ErrorCorpus& corpus, const std::set<std::string>& vocabulary);

/// `corruption<TAB>tag` lines.
void write_corpus_dump(std::ostream& out, const ErrorCorpus& corpus);

/// Strips one leading space, if any.
std::string_view strip_leading_space(std::string_view s) noexcept;

}  // namespace lexrec
