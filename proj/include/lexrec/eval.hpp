#pragma once

// Recall/precision scoring against a key of (original, corrected) pairs, at
// utterance level and per error category.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexrec {

struct KeyPair {
  std::string original;
  std::string corrected;
  auto operator<=>(const KeyPair&) const = default;
};

struct RunPair {
  std::string input;
  std::string output;
  auto operator<=>(const RunPair&) const = default;
};

/// `original<TAB>corrected` lines. Throws kInput on a line without a tab.
std::vector<KeyPair> parse_key(std::istream& in);

/// `input<TAB>output` lines, or plain output lines that pair up with the key
/// originals by position. Throws kEvaluation when plain lines do not match
/// the key length.
std::vector<RunPair> parse_run(std::istream& in, std::span<const KeyPair> key);

enum class ErrorShape { kMisspelling, kRunOn, kSplit };

struct ErrorCategory {
  ErrorShape shape = ErrorShape::kMisspelling;
  bool real_word = false;
  bool multiple = false;
  bool operator==(const ErrorCategory&) const = default;
};

const char* error_shape_name(ErrorShape shape) noexcept;

/// Optimal string alignment distance: unit-cost insertion, deletion,
/// substitution and adjacent transposition.
std::size_t osa_distance(std::string_view a, std::string_view b);

/// Run-on when the corrected span has more white-space tokens, split when it
/// has fewer, otherwise misspelling. Real-word when some original token is a
/// lexicon word. Multiple when more than one basic operation is needed.
/// Throws kEvaluation for identical spans.
ErrorCategory classify_error(std::string_view original_span, std::string_view corrected_span,
                             const std::set<std::string>& lexicon);

/// A changed stretch of tokens: original tokens [begin, end) became
/// `corrected`.
struct ErrorSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string original;
  std::string corrected;
  bool operator==(const ErrorSpan&) const = default;
};

/// Token-level longest-common-subsequence alignment. Changed stretches with
/// equal token counts are split into one span per token pair; a stretch with
/// nothing on one side absorbs its left (or right) neighbour.
std::vector<ErrorSpan> align_errors(std::string_view original, std::string_view corrected);

struct CategoryScore {
  std::string name;
  std::size_t a = 0;  // key
  std::size_t b = 0;  // key entries found in the outcome
  std::size_t c = 0;  // outcome
  std::optional<double> recall() const;
  std::optional<double> precision() const;
};

struct EvaluationReport {
  /// "utterance" first, then total, the three shapes, nonword, real-word,
  /// single, multiple and nonword-single.
  std::vector<CategoryScore> rows;

  const CategoryScore& row(std::string_view name) const;
  /// Shape counts, lexical counts and single/multiple counts each add up to
  /// the total.
  bool consistent() const;
};

/// Throws kEvaluation when a key input is missing from the run or has
/// conflicting outputs.
EvaluationReport evaluate(std::span<const RunPair> run, std::span<const KeyPair> key,
                          const std::set<std::string>& lexicon);

/// Tab-separated: category, |A|, |B|, |C|, recall, precision.
std::string format_report_tsv(const EvaluationReport& report);
std::string format_report_text(const EvaluationReport& report);

}  // namespace lexrec
