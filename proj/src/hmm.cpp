#include "lexrec/hmm.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "lexrec/error.hpp"

namespace lexrec {

double cost_of(double probability) noexcept {
  return probability > 0.0 ? -std::log(probability) : kInfiniteCost;
}

// ---------------------------------------------------------------------------
// Hmm

Hmm::Hmm(std::size_t num_states, std::size_t alphabet_size)
    : num_states_(num_states), alphabet_size_(alphabet_size) {
  if (num_states < 3) {
    fail(ErrorKind::kParameter, "an HMM needs at least 3 states (entry, emitting, exit)");
  }
  if (alphabet_size < 1) fail(ErrorKind::kParameter, "an HMM needs a non-empty alphabet");
  trans_ = Matrix(num_states - 1, num_states - 1);
  obs_ = Matrix(num_states - 2, alphabet_size);
}

double Hmm::trans(std::size_t from, std::size_t to) const {
  return trans_(from, to - 1);
}

void Hmm::set_trans(std::size_t from, std::size_t to, double p) {
  if (from + 1 >= num_states_ || to == 0 || to >= num_states_) {
    fail(ErrorKind::kParameter, "transition index out of range");
  }
  trans_(from, to - 1) = p;
}

std::span<const double> Hmm::trans_row(std::size_t from) const { return trans_.row(from); }
std::span<double> Hmm::trans_row(std::size_t from) { return trans_.row(from); }

double Hmm::obs(std::size_t state, Symbol symbol) const { return obs_(state - 1, symbol); }

void Hmm::set_obs(std::size_t state, Symbol symbol, double p) {
  if (!is_emitting(state) || symbol >= alphabet_size_) {
    fail(ErrorKind::kParameter, "observation index out of range");
  }
  obs_(state - 1, symbol) = p;
}

std::span<const double> Hmm::obs_row(std::size_t state) const { return obs_.row(state - 1); }
std::span<double> Hmm::obs_row(std::size_t state) { return obs_.row(state - 1); }

namespace {

void check_row(std::span<const double> row, double tolerance, const char* what,
               std::size_t index) {
  double sum = 0.0;
  for (double p : row) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(ErrorKind::kParameter, std::string(what) + " row " + std::to_string(index) +
                                      " has a value outside [0,1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    std::ostringstream msg;
    msg << what << " row " << index << " sums to " << sum;
    fail(ErrorKind::kParameter, msg.str());
  }
}

}  // namespace

void Hmm::validate(double tolerance) const {
  for (std::size_t i = 0; i + 1 < num_states_; ++i) {
    check_row(trans_row(i), tolerance, "transition", i);
  }
  for (std::size_t j = 1; j + 1 < num_states_; ++j) {
    check_row(obs_row(j), tolerance, "observation", j);
  }
}

void Hmm::check_sequence(std::span<const Symbol> obs) const {
  if (obs.empty()) fail(ErrorKind::kInput, "observation sequence is empty");
  for (Symbol s : obs) {
    if (s >= alphabet_size_) {
      fail(ErrorKind::kInput, "observation symbol " + std::to_string(s) +
                                  " outside alphabet of size " +
                                  std::to_string(alphabet_size_));
    }
  }
}

// ---------------------------------------------------------------------------
// Forward / backward

double Trellis::alpha(std::size_t t, std::size_t i) const {
  double v = alpha_hat(t, i);
  for (std::size_t s = 1; s <= t; ++s) v *= scale[s];
  return v;
}

double Trellis::beta(std::size_t t, std::size_t i) const {
  double v = beta_hat(t, i);
  if (!possible()) return v;
  for (std::size_t s = t + 1; s < scale.size(); ++s) v *= scale[s];
  return v;
}

Trellis forward(const Hmm& hmm, std::span<const Symbol> obs) {
  hmm.check_sequence(obs);
  const std::size_t n = hmm.num_states();
  const std::size_t len = obs.size();
  Trellis tr;
  tr.alpha_hat = Matrix(len + 1, n);
  tr.scale.assign(len + 2, 0.0);
  tr.scale[0] = 1.0;
  tr.alpha_hat(0, Hmm::entry()) = 1.0;

  double log_p = 0.0;
  for (std::size_t t = 1; t <= len; ++t) {
    double c = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) acc += tr.alpha_hat(t - 1, i) * hmm.trans(i, j);
      const double v = acc * hmm.obs(j, obs[t - 1]);
      tr.alpha_hat(t, j) = v;
      c += v;
    }
    if (c <= 0.0) return tr;  // impossible; probability stays 0
    for (std::size_t j = 1; j + 1 < n; ++j) tr.alpha_hat(t, j) /= c;
    tr.scale[t] = c;
    log_p += std::log(c);
  }
  double c_exit = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) c_exit += tr.alpha_hat(len, i) * hmm.trans(i, n - 1);
  if (c_exit <= 0.0) return tr;
  tr.scale[len + 1] = c_exit;
  log_p += std::log(c_exit);

  double p = 1.0;
  for (std::size_t t = 1; t <= len + 1; ++t) p *= tr.scale[t];
  tr.probability = p;
  tr.log_probability = log_p;
  return tr;
}

namespace {

void fill_backward(const Hmm& hmm, std::span<const Symbol> obs, Trellis& tr) {
  const std::size_t n = hmm.num_states();
  const std::size_t len = obs.size();
  tr.beta_hat = Matrix(len + 1, n);
  // Without a forward pass to borrow scale factors from, betas stay unscaled.
  const bool scaled = tr.possible();
  const auto scale = [&](std::size_t t) { return scaled ? tr.scale[t] : 1.0; };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    tr.beta_hat(len, i) = hmm.trans(i, n - 1) / scale(len + 1);
  }
  for (std::size_t t = len; t-- > 0;) {
    const Symbol o = obs[t];  // o_{t+1}
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 1; j + 1 < n; ++j) {
        acc += hmm.trans(i, j) * hmm.obs(j, o) * tr.beta_hat(t + 1, j);
      }
      tr.beta_hat(t, i) = acc / scale(t + 1);
    }
  }
}

}  // namespace

Trellis backward(const Hmm& hmm, std::span<const Symbol> obs) {
  Trellis tr = forward(hmm, obs);
  fill_backward(hmm, obs, tr);
  return tr;
}

// ---------------------------------------------------------------------------
// Viterbi

ViterbiResult viterbi(const Hmm& hmm, std::span<const Symbol> obs) {
  hmm.check_sequence(obs);
  const std::size_t n = hmm.num_states();
  const std::size_t len = obs.size();
  Matrix phi(len + 1, n);
  std::vector<std::size_t> psi((len + 1) * n, 0);
  phi(0, Hmm::entry()) = 1.0;

  for (std::size_t t = 1; t <= len; ++t) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      double best = 0.0;
      std::size_t arg = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double v = phi(t - 1, i) * hmm.trans(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      phi(t, j) = best * hmm.obs(j, obs[t - 1]);
      psi[t * n + j] = arg;
    }
  }

  ViterbiResult result;
  std::size_t last = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double v = phi(len, i) * hmm.trans(i, n - 1);
    if (v > result.probability) {
      result.probability = v;
      last = i;
    }
  }
  if (result.probability <= 0.0) return result;
  result.path.assign(len, 0);
  result.path[len - 1] = last;
  for (std::size_t t = len - 1; t >= 1; --t) result.path[t - 1] = psi[(t + 1) * n + result.path[t]];
  return result;
}

ViterbiCostResult viterbi_cost(const Hmm& hmm, std::span<const Symbol> obs) {
  hmm.check_sequence(obs);
  const std::size_t n = hmm.num_states();
  const std::size_t len = obs.size();
  Matrix delta(len + 1, n, kInfiniteCost);
  std::vector<std::size_t> psi((len + 1) * n, 0);
  delta(0, Hmm::entry()) = 0.0;

  for (std::size_t t = 1; t <= len; ++t) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      double best = kInfiniteCost;
      std::size_t arg = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double v = delta(t - 1, i) + cost_of(hmm.trans(i, j));
        if (v < best) {
          best = v;
          arg = i;
        }
      }
      delta(t, j) = best + cost_of(hmm.obs(j, obs[t - 1]));
      psi[t * n + j] = arg;
    }
  }

  ViterbiCostResult result;
  std::size_t last = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double v = delta(len, i) + cost_of(hmm.trans(i, n - 1));
    if (v < result.cost) {
      result.cost = v;
      last = i;
    }
  }
  if (result.cost == kInfiniteCost) return result;
  result.path.assign(len, 0);
  result.path[len - 1] = last;
  for (std::size_t t = len - 1; t >= 1; --t) result.path[t - 1] = psi[(t + 1) * n + result.path[t]];
  return result;
}

// ---------------------------------------------------------------------------
// Baum-Welch

namespace {

struct ExpectedCounts {
  Matrix trans;            // (N-1) x (N-1), same layout as the model
  Matrix obs;              // (N-2) x K
  std::vector<double> occupancy;      // sum_t alpha_t(i) beta_t(i) / P, i in 0..N-2
  std::vector<double> emit_occupancy; // sum_{t>=1} of the same, emitting states

  ExpectedCounts(std::size_t n, std::size_t k)
      : trans(n - 1, n - 1), obs(n - 2, k), occupancy(n - 1, 0.0), emit_occupancy(n - 2, 0.0) {}
};

// Adds the posterior counts of one sequence; returns its log-likelihood or
// -inf when the sequence is impossible (nothing is added then).
double accumulate(const Hmm& hmm, std::span<const Symbol> obs, ExpectedCounts& counts) {
  Trellis tr = forward(hmm, obs);
  if (!tr.possible()) return -kInfiniteCost;
  fill_backward(hmm, obs, tr);
  const std::size_t n = hmm.num_states();
  const std::size_t len = obs.size();

  for (std::size_t t = 0; t <= len; ++t) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double gamma = tr.alpha_hat(t, i) * tr.beta_hat(t, i);
      counts.occupancy[i] += gamma;
      if (t >= 1 && hmm.is_emitting(i)) {
        counts.emit_occupancy[i - 1] += gamma;
        counts.obs(i - 1, obs[t - 1]) += gamma;
      }
    }
  }
  for (std::size_t t = 0; t < len; ++t) {
    const Symbol o = obs[t];
    const double inv_c = 1.0 / tr.scale[t + 1];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double a_hat = tr.alpha_hat(t, i);
      if (a_hat == 0.0) continue;
      for (std::size_t j = 1; j + 1 < n; ++j) {
        counts.trans(i, j - 1) +=
            a_hat * hmm.trans(i, j) * hmm.obs(j, o) * tr.beta_hat(t + 1, j) * inv_c;
      }
    }
  }
  // The exit transition can only be taken at t = T.
  const double inv_exit = 1.0 / tr.scale[len + 1];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    counts.trans(i, n - 2) += tr.alpha_hat(len, i) * hmm.trans(i, n - 1) * inv_exit;
  }
  return tr.log_probability;
}

Hmm reestimate(const Hmm& hmm, const ExpectedCounts& counts) {
  Hmm next = hmm;
  const std::size_t n = hmm.num_states();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(counts.occupancy[i] > 0.0)) continue;  // never visited: keep the old row
    auto row = next.trans_row(i);
    auto num = counts.trans.row(i);
    // The counts sum to the occupancy; dividing by their own sum keeps the
    // row exactly stochastic under rounding.
    const double denom = std::accumulate(num.begin(), num.end(), 0.0);
    if (!(denom > 0.0)) continue;
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = num[j] / denom;
  }
  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (!(counts.emit_occupancy[j - 1] > 0.0)) continue;
    auto row = next.obs_row(j);
    auto num = counts.obs.row(j - 1);
    const double denom = std::accumulate(num.begin(), num.end(), 0.0);
    if (!(denom > 0.0)) continue;
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = num[k] / denom;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (double p : next.trans_row(i)) {
      if (std::isnan(p)) fail(ErrorKind::kNumeric, "NaN in reestimated transitions");
    }
  }
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (double p : next.obs_row(j)) {
      if (std::isnan(p)) fail(ErrorKind::kNumeric, "NaN in reestimated observations");
    }
  }
  return next;
}

// One E-step over the usable sequences.
double expectation(const Hmm& hmm, std::span<const ObservationSequence> corpus,
                   const std::vector<bool>& usable, ExpectedCounts& counts) {
  double ll = 0.0;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (!usable[s]) continue;
    ll += accumulate(hmm, corpus[s], counts);
  }
  return ll;
}

}  // namespace

TrainingResult baum_welch_multi(const Hmm& hmm, std::span<const ObservationSequence> corpus,
                                const TrainingOptions& options) {
  const std::size_t n = hmm.num_states();
  const std::size_t k = hmm.alphabet_size();
  std::vector<bool> usable(corpus.size(), false);
  std::size_t skipped = 0;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    hmm.check_sequence(corpus[s]);
    usable[s] = forward(hmm, corpus[s]).possible();
    if (!usable[s]) ++skipped;
  }
  if (skipped == corpus.size()) {
    fail(ErrorKind::kTraining, "no training sequence is possible under the initial model");
  }

  TrainingResult result{hmm, {}, 0, false, skipped};
  ExpectedCounts counts(n, k);
  double ll = expectation(hmm, corpus, usable, counts);
  result.log_likelihood.push_back(ll);

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    Hmm next = reestimate(result.model, counts);
    ExpectedCounts next_counts(n, k);
    const double next_ll = expectation(next, corpus, usable, next_counts);
    if (std::isnan(next_ll)) fail(ErrorKind::kNumeric, "log-likelihood became NaN");
    result.model = std::move(next);
    result.log_likelihood.push_back(next_ll);
    result.iterations = it + 1;
    counts = std::move(next_counts);
    const double gain = next_ll - ll;
    ll = next_ll;
    if (gain < options.conv_eps) {
      result.converged = true;
      break;
    }
  }
  return result;
}

TrainingResult baum_welch(const Hmm& hmm, std::span<const Symbol> obs,
                          const TrainingOptions& options) {
  hmm.check_sequence(obs);
  if (!forward(hmm, obs).possible()) {
    fail(ErrorKind::kTraining, "training sequence has zero probability under the model");
  }
  const ObservationSequence seq(obs.begin(), obs.end());
  return baum_welch_multi(hmm, std::span<const ObservationSequence>(&seq, 1), options);
}

// ---------------------------------------------------------------------------
// Smoothing

std::vector<double> smooth_additive(std::span<const double> row, double eps,
                                    const std::vector<bool>& eligible) {
  if (!(eps > 0.0)) fail(ErrorKind::kParameter, "smoothing floor must be positive");
  if (!eligible.empty() && eligible.size() != row.size()) {
    fail(ErrorKind::kParameter, "eligibility mask does not match the row length");
  }
  const auto is_eligible = [&](std::size_t i) { return eligible.empty() || eligible[i]; };

  std::vector<double> out(row.begin(), row.end());
  std::vector<bool> raised(row.size(), false);
  for (std::size_t i = 0; i < row.size(); ++i) raised[i] = is_eligible(i) && row[i] < eps;

  // Scaling the kept mass can push an entry below the floor; raise it too and
  // redo until stable.
  for (;;) {
    std::size_t z = 0;
    double kept = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (raised[i]) {
        ++z;
      } else {
        kept += row[i];
      }
    }
    if (z == 0) return out;
    const double budget = 1.0 - eps * static_cast<double>(z);
    if (!(budget > 0.0) || !(kept > 0.0)) {
      fail(ErrorKind::kParameter, "smoothing floor too large for the distribution");
    }
    const double factor = budget / kept;
    bool changed = false;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (raised[i]) {
        out[i] = eps;
      } else {
        out[i] = row[i] * factor;
        if (is_eligible(i) && out[i] < eps) {
          raised[i] = true;
          changed = true;
        }
      }
    }
    if (!changed) return out;
  }
}

// ---------------------------------------------------------------------------
// Serialisation

std::string escape_symbol(std::string_view symbol) {
  if (symbol.empty()) return "\\e";
  std::string out;
  for (char c : symbol) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case ' ': out += "\\s"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_symbol(std::string_view token) {
  if (token == "\\e") return {};
  std::string out;
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] != '\\') {
      out += token[i];
      continue;
    }
    if (++i == token.size()) fail(ErrorKind::kInput, "dangling escape in symbol");
    switch (token[i]) {
      case '\\': out += '\\'; break;
      case 's': out += ' '; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: fail(ErrorKind::kInput, "unknown escape in symbol");
    }
  }
  return out;
}

namespace {

constexpr const char* kHmmTag = "LEXREC-HMM";
constexpr int kHmmVersion = 1;

void write_row(std::ostream& out, std::span<const double> row) {
  char buf[40];
  for (std::size_t i = 0; i < row.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", row[i]);
    if (i) out << ' ';
    out << buf;
  }
  out << '\n';
}

void expect_word(std::istream& in, const char* word) {
  std::string got;
  if (!(in >> got) || got != word) {
    fail(ErrorKind::kInput, std::string("HMM file: expected '") + word + "'");
  }
}

std::size_t read_count(std::istream& in, const char* key) {
  expect_word(in, key);
  long long v = -1;
  if (!(in >> v) || v < 0) fail(ErrorKind::kInput, std::string("HMM file: bad ") + key);
  return static_cast<std::size_t>(v);
}

void read_row(std::istream& in, std::span<double> row) {
  std::string tok;
  for (double& v : row) {
    if (!(in >> tok)) fail(ErrorKind::kInput, "HMM file: truncated table");
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') fail(ErrorKind::kInput, "HMM file: bad number " + tok);
  }
}

}  // namespace

void write_hmm(std::ostream& out, const Hmm& hmm, std::span<const std::string> symbols) {
  if (symbols.size() != hmm.alphabet_size()) {
    fail(ErrorKind::kParameter, "symbol table size does not match the alphabet");
  }
  out << kHmmTag << ' ' << kHmmVersion << '\n';
  out << "states " << hmm.num_states() << '\n';
  out << "symbols " << hmm.alphabet_size() << '\n';
  for (const auto& s : symbols) out << escape_symbol(s) << '\n';
  out << "transitions\n";
  for (std::size_t i = 0; i + 1 < hmm.num_states(); ++i) write_row(out, hmm.trans_row(i));
  out << "observations\n";
  for (std::size_t j = 1; j + 1 < hmm.num_states(); ++j) write_row(out, hmm.obs_row(j));
  out << "end\n";
}

HmmFile read_hmm(std::istream& in) {
  expect_word(in, kHmmTag);
  int version = 0;
  if (!(in >> version) || version != kHmmVersion) {
    fail(ErrorKind::kInput, "HMM file: unsupported version");
  }
  const std::size_t n = read_count(in, "states");
  const std::size_t k = read_count(in, "symbols");
  HmmFile file{Hmm(n, k), {}};
  file.symbols.reserve(k);
  std::string tok;
  for (std::size_t s = 0; s < k; ++s) {
    if (!(in >> tok)) fail(ErrorKind::kInput, "HMM file: truncated symbol table");
    file.symbols.push_back(unescape_symbol(tok));
  }
  expect_word(in, "transitions");
  for (std::size_t i = 0; i + 1 < n; ++i) read_row(in, file.hmm.trans_row(i));
  expect_word(in, "observations");
  for (std::size_t j = 1; j + 1 < n; ++j) read_row(in, file.hmm.obs_row(j));
  expect_word(in, "end");
  file.hmm.validate();
  return file;
}

}  // namespace lexrec
