#include "lexrec/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>

#include "lexrec/error.hpp"

namespace lexrec {

namespace {

std::vector<std::string> tokens_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::vector<KeyPair> parse_key(std::istream& in) {
  std::vector<KeyPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::kInput, "key line " + std::to_string(lineno) + ": expected original<TAB>corrected");
    }
    out.push_back(KeyPair{line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

std::vector<RunPair> parse_run(std::istream& in, std::span<const KeyPair> key) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  const bool paired = std::any_of(lines.begin(), lines.end(),
                                  [](const std::string& l) { return l.find('\t') != std::string::npos; });
  std::vector<RunPair> out;
  if (paired) {
    for (const std::string& l : lines) {
      if (l.empty()) continue;
      const auto tab = l.find('\t');
      if (tab == std::string::npos) fail(ErrorKind::kInput, "run line without a tab: " + l);
      out.push_back(RunPair{l.substr(0, tab), l.substr(tab + 1)});
    }
    return out;
  }
  if (lines.size() != key.size()) {
    fail(ErrorKind::kEvaluation, "run has " + std::to_string(lines.size()) + " lines but the key has " +
                                     std::to_string(key.size()));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) out.push_back(RunPair{key[i].original, lines[i]});
  return out;
}

const char* error_shape_name(ErrorShape shape) noexcept {
  switch (shape) {
    case ErrorShape::kMisspelling: return "misspelling";
    case ErrorShape::kRunOn: return "run-on";
    case ErrorShape::kSplit: return "split";
  }
  return "?";
}

std::size_t osa_distance(std::string_view a, std::string_view b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + sub});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
      }
    }
  }
  return d[n][m];
}

ErrorCategory classify_error(std::string_view original_span, std::string_view corrected_span,
                             const std::set<std::string>& lexicon) {
  const auto orig = tokens_of(original_span);
  const auto corr = tokens_of(corrected_span);
  if (orig == corr) fail(ErrorKind::kEvaluation, "identical spans are not an error");
  ErrorCategory cat;
  if (corr.size() > orig.size()) {
    cat.shape = ErrorShape::kRunOn;
  } else if (corr.size() < orig.size()) {
    cat.shape = ErrorShape::kSplit;
  }
  cat.real_word = std::any_of(orig.begin(), orig.end(), [&](const std::string& t) { return lexicon.count(t) > 0; });
  cat.multiple = osa_distance(join(orig, 0, orig.size()), join(corr, 0, corr.size())) > 1;
  return cat;
}

std::vector<ErrorSpan> align_errors(std::string_view original, std::string_view corrected) {
  const auto a = tokens_of(original);
  const auto b = tokens_of(corrected);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  struct Stretch {
    std::size_t a0, a1, b0, b1;
  };
  std::vector<Stretch> raw;
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t ai = 0;
  std::size_t bj = 0;
  const auto flush = [&](std::size_t ie, std::size_t je) {
    if (ai < ie || bj < je) raw.push_back({ai, ie, bj, je});
  };
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j] && lcs[i][j] == lcs[i + 1][j + 1] + 1) {
      flush(i, j);
      ++i;
      ++j;
      ai = i;
      bj = j;
    } else if (j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) {
      ++i;
    } else {
      ++j;
    }
  }
  flush(n, m);

  // One-sided stretches take a matched neighbour so both sides have text.
  for (Stretch& s : raw) {
    if (s.a0 < s.a1 && s.b0 < s.b1) continue;
    if (s.a0 > 0 && s.b0 > 0) {
      --s.a0;
      --s.b0;
    } else if (s.a1 < n && s.b1 < m) {
      ++s.a1;
      ++s.b1;
    }
  }
  std::vector<Stretch> merged;
  for (const Stretch& s : raw) {
    if (!merged.empty() && (s.a0 < merged.back().a1 || s.b0 < merged.back().b1)) {
      merged.back().a1 = std::max(merged.back().a1, s.a1);
      merged.back().b1 = std::max(merged.back().b1, s.b1);
    } else {
      merged.push_back(s);
    }
  }

  std::vector<ErrorSpan> out;
  for (const Stretch& s : merged) {
    if (s.a1 - s.a0 == s.b1 - s.b0) {
      for (std::size_t k = 0; k < s.a1 - s.a0; ++k) {
        if (a[s.a0 + k] == b[s.b0 + k]) continue;
        out.push_back(ErrorSpan{s.a0 + k, s.a0 + k + 1, a[s.a0 + k], b[s.b0 + k]});
      }
    } else {
      out.push_back(ErrorSpan{s.a0, s.a1, join(a, s.a0, s.a1), join(b, s.b0, s.b1)});
    }
  }
  return out;
}

std::optional<double> CategoryScore::recall() const {
  if (a == 0) return std::nullopt;
  return 100.0 * static_cast<double>(b) / static_cast<double>(a);
}

std::optional<double> CategoryScore::precision() const {
  if (c == 0) return std::nullopt;
  return 100.0 * static_cast<double>(b) / static_cast<double>(c);
}

const CategoryScore& EvaluationReport::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  fail(ErrorKind::kInternal, "no report row named " + std::string(name));
}

bool EvaluationReport::consistent() const {
  const auto sums = [&](std::initializer_list<const char*> parts) {
    const CategoryScore& total = row("total");
    std::size_t a = 0, b = 0, c = 0;
    for (const char* p : parts) {
      a += row(p).a;
      b += row(p).b;
      c += row(p).c;
    }
    return a == total.a && b == total.b && c == total.c;
  };
  return sums({"misspelling", "run-on", "split"}) && sums({"nonword", "real-word"}) &&
         sums({"single", "multiple"});
}

namespace {

const std::vector<std::string> kRowNames = {"utterance", "total",     "misspelling", "run-on",
                                            "split",     "nonword",   "real-word",   "single",
                                            "multiple",  "nonword-single"};

enum Field { kA, kB, kC };

void count(EvaluationReport& report, const ErrorCategory& cat, Field field) {
  const auto bump = [&](std::string_view name) {
    for (auto& r : report.rows) {
      if (r.name != name) continue;
      (field == kA ? r.a : field == kB ? r.b : r.c) += 1;
    }
  };
  bump("total");
  bump(error_shape_name(cat.shape));
  bump(cat.real_word ? "real-word" : "nonword");
  bump(cat.multiple ? "multiple" : "single");
  if (!cat.real_word && !cat.multiple) bump("nonword-single");
}

bool overlaps(const ErrorSpan& x, const ErrorSpan& y) { return x.begin < y.end && y.begin < x.end; }

}  // namespace

EvaluationReport evaluate(std::span<const RunPair> run, std::span<const KeyPair> key,
                          const std::set<std::string>& lexicon) {
  std::set<KeyPair> a_set;
  std::map<std::string, std::string> key_correction;
  for (const KeyPair& k : key) {
    if (k.original == k.corrected) continue;
    auto [it, fresh] = key_correction.emplace(k.original, k.corrected);
    if (!fresh && it->second != k.corrected) {
      fail(ErrorKind::kEvaluation, "conflicting key entries for '" + k.original + "'");
    }
    a_set.insert(k);
  }
  const std::set<RunPair> run_set(run.begin(), run.end());
  std::map<std::string, std::string> output_of;
  for (const RunPair& r : run_set) {
    auto [it, fresh] = output_of.emplace(r.input, r.output);
    if (!fresh && it->second != r.output) {
      fail(ErrorKind::kEvaluation, "conflicting run outputs for '" + r.input + "'");
    }
  }

  EvaluationReport report;
  for (const auto& name : kRowNames) report.rows.push_back(CategoryScore{name});
  CategoryScore& utt = report.rows.front();

  utt.a = a_set.size();
  for (const KeyPair& k : a_set) {
    auto it = output_of.find(k.original);
    if (it == output_of.end()) fail(ErrorKind::kEvaluation, "key input missing from the run: '" + k.original + "'");
    if (it->second == k.corrected) ++utt.b;
  }
  for (const RunPair& r : run_set) {
    if (r.output != r.input || key_correction.count(r.input)) ++utt.c;
  }

  for (const KeyPair& k : a_set) {
    const std::string& output = output_of.at(k.original);
    const auto expected = align_errors(k.original, k.corrected);
    const auto produced = align_errors(k.original, output);
    for (const ErrorSpan& e : expected) {
      const ErrorCategory cat = classify_error(e.original, e.corrected, lexicon);
      count(report, cat, kA);
      count(report, cat, kC);
      if (std::find(produced.begin(), produced.end(), e) != produced.end()) count(report, cat, kB);
    }
    for (const ErrorSpan& s : produced) {
      const bool attempt = std::any_of(expected.begin(), expected.end(),
                                       [&](const ErrorSpan& e) { return overlaps(e, s); });
      if (!attempt) count(report, classify_error(s.original, s.corrected, lexicon), kC);
    }
  }
  for (const RunPair& r : run_set) {
    if (key_correction.count(r.input) || r.output == r.input) continue;
    for (const ErrorSpan& s : align_errors(r.input, r.output)) {
      count(report, classify_error(s.original, s.corrected, lexicon), kC);
    }
  }
  return report;
}

namespace {

std::string percent(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *v);
  return buf;
}

}  // namespace

std::string format_report_tsv(const EvaluationReport& report) {
  std::ostringstream out;
  out << "category\tA\tB\tC\trecall\tprecision\n";
  for (const auto& r : report.rows) {
    out << r.name << '\t' << r.a << '\t' << r.b << '\t' << r.c << '\t' << percent(r.recall()) << '\t'
        << percent(r.precision()) << '\n';
  }
  return out.str();
}

std::string format_report_text(const EvaluationReport& report) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-16s %6s %6s %6s %8s %10s\n", "category", "|A|", "|B|", "|C|", "recall",
                "precision");
  out << buf;
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%-16s %6zu %6zu %6zu %8s %10s\n", r.name.c_str(), r.a, r.b, r.c,
                  percent(r.recall()).c_str(), percent(r.precision()).c_str());
    out << buf;
  }
  return out.str();
}

}  // namespace lexrec
