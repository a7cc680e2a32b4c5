#include "lexrec/error_gen.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "lexrec/error.hpp"

namespace lexrec {

KeyboardLayout KeyboardLayout::qwerty() {
  KeyboardLayout kb;
  for (std::string_view row : {"qwertyuiop", "asdfghjkl", "zxcvbnm"}) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::string nb;
      if (i > 0) nb += row[i - 1];
      if (i + 1 < row.size()) nb += row[i + 1];
      kb.table_[row[i]] = nb;
    }
  }
  return kb;
}

KeyboardLayout KeyboardLayout::parse(std::istream& in) {
  KeyboardLayout kb;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab != 1) {
      fail(ErrorKind::kInput, "keyboard layout line " + std::to_string(lineno) +
                                  ": expected char<TAB>neighbors");
    }
    std::string nb = line.substr(2);
    if (nb.size() > 2) {
      fail(ErrorKind::kInput, "keyboard layout line " + std::to_string(lineno) +
                                  ": more than two neighbors");
    }
    kb.table_[line[0]] = nb;
  }
  for (const auto& [key, nbs] : kb.table_) {
    for (char other : nbs) {
      auto it = kb.table_.find(other);
      if (it != kb.table_.end() && it->second.find(key) == std::string::npos) {
        fail(ErrorKind::kInput, std::string("keyboard layout is not symmetric for '") + key +
                                    "' and '" + other + "'");
      }
    }
  }
  return kb;
}

std::string_view KeyboardLayout::neighbors(char c) const {
  auto it = table_.find(c);
  return it == table_.end() ? std::string_view{} : std::string_view{it->second};
}

void KeyboardLayout::set_neighbors(char c, std::string neighbors) {
  table_[c] = std::move(neighbors);
}

const char* error_function_tag(ErrorFunction f) noexcept {
  switch (f) {
    case kDeletion: return "del";
    case kInsertion: return "ins";
    case kSubstitution: return "sub";
    case kTransposition: return "tra";
    case kSpaceInsertion: return "space";
    case kDoubleStroke: return "double";
  }
  return "?";
}

ErrorFunctions parse_error_functions(std::string_view list) {
  ErrorFunctions out = 0;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto comma = list.find(',', pos);
    if (comma == std::string_view::npos) comma = list.size();
    const std::string_view tag = list.substr(pos, comma - pos);
    bool found = false;
    for (unsigned bit = 0; bit < 6; ++bit) {
      const auto f = static_cast<ErrorFunction>(1u << bit);
      if (tag == error_function_tag(f)) {
        out |= f;
        found = true;
      }
    }
    if (tag == "all") {
      out |= kAllErrorFunctions;
      found = true;
    }
    if (!found) fail(ErrorKind::kParameter, "unknown error function '" + std::string(tag) + "'");
    pos = comma + 1;
  }
  return out;
}

std::string_view strip_leading_space(std::string_view s) noexcept {
  return (!s.empty() && s.front() == ' ') ? s.substr(1) : s;
}

std::vector<std::string> gen_deletions(std::string_view word) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    std::string s(word);
    s.erase(i, 1);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> gen_insertions(std::string_view word, const KeyboardLayout& kb) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p <= word.size(); ++p) {
    std::string chars;
    if (p > 0) chars += kb.neighbors(word[p - 1]);
    if (p < word.size()) chars += kb.neighbors(word[p]);
    for (char c : chars) {
      std::string s(word);
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(p), c);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<std::string> gen_substitutions(std::string_view word, const KeyboardLayout& kb) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    for (char c : kb.neighbors(word[i])) {
      std::string s(word);
      s[i] = c;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<std::string> gen_transpositions(std::string_view word) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i + 1 < word.size(); ++i) {
    std::string s(word);
    std::swap(s[i], s[i + 1]);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> gen_space_insertions(std::string_view word) {
  std::vector<std::string> out;
  const std::size_t offset = (!word.empty() && word.front() == ' ') ? 1 : 0;
  const std::size_t body = word.size() - offset;
  for (std::size_t p = 1; p < body; ++p) {
    std::string s(word);
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(offset + p), ' ');
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> gen_double_strokes(std::string_view word) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    std::string s(word);
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(i), word[i]);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> gen_insertions_full(std::string_view word, std::string_view alphabet) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p <= word.size(); ++p) {
    for (char c : alphabet) {
      std::string s(word);
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(p), c);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<std::string> gen_substitutions_full(std::string_view word, std::string_view alphabet) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    for (char c : alphabet) {
      if (c == word[i]) continue;
      std::string s(word);
      s[i] = c;
      out.push_back(std::move(s));
    }
  }
  return out;
}

long long count_single_error_candidates(long long n, long long alphabet_size) {
  if (n < 1 || alphabet_size < 1) fail(ErrorKind::kParameter, "word length and alphabet must be positive");
  return n + alphabet_size * (n + 1) + (alphabet_size - 1) * n + (n - 1);
}

std::vector<std::string> ErrorCorpus::training_strings() const {
  std::vector<std::string> out;
  out.reserve(corruptions.size() + 1);
  out.push_back(source);
  for (const auto& c : corruptions) out.push_back(c.text);
  return out;
}

namespace {

void add_unique(ErrorCorpus& corpus, std::unordered_set<std::string>& seen,
                std::vector<std::string> raw, ErrorFunction op) {
  for (auto& s : raw) {
    if (s.empty() || s == corpus.source) continue;
    if (!seen.insert(s).second) continue;
    corpus.corruptions.push_back(Corruption{std::move(s), op});
  }
}

}  // namespace

ErrorCorpus build_error_corpus(std::string_view word, ErrorFunctions functions,
                               const KeyboardLayout& kb) {
  ErrorCorpus corpus{std::string(word), {}};
  std::unordered_set<std::string> seen;
  if (functions & kDeletion) add_unique(corpus, seen, gen_deletions(word), kDeletion);
  if (functions & kInsertion) add_unique(corpus, seen, gen_insertions(word, kb), kInsertion);
  if (functions & kSubstitution) {
    add_unique(corpus, seen, gen_substitutions(word, kb), kSubstitution);
  }
  if (functions & kTransposition) {
    add_unique(corpus, seen, gen_transpositions(word), kTransposition);
  }
  if (functions & kSpaceInsertion) {
    add_unique(corpus, seen, gen_space_insertions(word), kSpaceInsertion);
  }
  if (functions & kDoubleStroke) add_unique(corpus, seen, gen_double_strokes(word), kDoubleStroke);
  return corpus;
}

ErrorCorpus build_space_only_corpus(std::string_view word) {
  ErrorCorpus corpus{std::string(word), {}};
  std::unordered_set<std::string> seen;
  if (!word.empty() && word.front() == ' ') {
    add_unique(corpus, seen, {std::string(word.substr(1))}, kDeletion);
  }
  add_unique(corpus, seen, gen_space_insertions(word), kSpaceInsertion);
  return corpus;
}

ErrorCorpus filter_real_words(const ErrorCorpus& corpus, const std::set<std::string>& vocabulary) {
  ErrorCorpus out{corpus.source, {}};
  const std::string_view own = strip_leading_space(corpus.source);
  for (const auto& c : corpus.corruptions) {
    const std::string_view bare = strip_leading_space(c.text);
    if (bare != own && vocabulary.count(std::string(bare))) continue;
    out.corruptions.push_back(c);
  }
  return out;
}

void write_corpus_dump(std::ostream& out, const ErrorCorpus& corpus) {
  for (const auto& c : corpus.corruptions) out << c.text << '\t' << error_function_tag(c.op) << '\n';
}

}  // namespace lexrec
